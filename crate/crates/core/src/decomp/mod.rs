//! Decompositions of bilinear symbols and of frequency annuli.

pub mod angular;
pub mod expansion;
pub mod flag;

pub use angular::{angular_frame, angular_piece_bounds, AngularFrame, AngularOptions, AngularReport, PieceReport};
pub use expansion::{
    expand_symbol, factor_coefficients, fourier_symbol_expansion, BlockFactor, ExpansionOptions, ExpansionTerm,
    SeparableExpansion,
};
pub use flag::{flag_split, FlagSplit};
