use std::io::Write;

use super::HierarchicalSpace;

impl HierarchicalSpace {
    /// CSV listing of the active basis: one row per function.
    pub fn write_functions_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "id,level,i,j,degree,truncated,terms,expansion_level,x0,x1,y0,y1"
        )?;
        for (id, f) in self.functions().iter().enumerate() {
            let b = self
                .support_boxes(f)
                .into_iter()
                .fold([f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY], |a, b| {
                    [a[0].min(b[0]), a[1].max(b[1]), a[2].min(b[2]), a[3].max(b[3])]
                });
            writeln!(
                w,
                "{id},{},{},{},{},{},{},{},{},{},{},{}",
                f.level,
                f.index.0,
                f.index.1,
                f.degree,
                u8::from(f.is_truncated()),
                f.expansion.terms.len(),
                f.expansion.level,
                b[0],
                b[1],
                b[2],
                b[3]
            )?;
        }
        Ok(())
    }

    /// CSV listing of the active mesh: one row per element.
    pub fn write_elements_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,level,ex,ey,x0,x1,y0,y1,quad_degree,functions")?;
        for (id, e) in self.elements().iter().enumerate() {
            writeln!(
                w,
                "{id},{},{},{},{},{},{},{},{},{}",
                e.level,
                e.index.0,
                e.index.1,
                e.x.0,
                e.x.1,
                e.y.0,
                e.y.1,
                e.quad_degree,
                self.element_functions(id).len()
            )?;
        }
        Ok(())
    }

    /// Short human-readable summary of the hierarchy.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for l in self.levels() {
            let nf = self.functions().iter().filter(|f| f.level == l.index).count();
            let ne = self.elements().iter().filter(|e| e.level == l.index).count();
            let (bx, by) = l.space.num_basis();
            s.push_str(&format!(
                "level {}: degree {}, {}x{} tensor functions, {nf} active functions, {ne} active elements\n",
                l.index,
                l.degree(),
                bx,
                by
            ));
        }
        s.push_str(&format!(
            "total: {} dofs, {} elements\n",
            self.num_dofs(),
            self.elements().len()
        ));
        s
    }
}
