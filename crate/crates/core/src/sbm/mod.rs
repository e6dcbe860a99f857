//! Shifted boundary method: Taylor shift operators, weak-form assembly and
//! boundary-driven refinement marking.

mod assemble;
mod mark;
mod shift;

pub use assemble::{assemble, AssembledSystem, NitscheConfig};
pub use mark::{mark_surrogate_functions, MarkWhich};
pub use shift::{
    directional_term, gradient_weights, shift_gradient, shift_value, shift_value_enhanced,
    shift_value_standard, value_weights, NeumannRule, ShiftConfig, ShiftKind,
};
