pub mod flat;
pub mod gibbons_hawking;
pub mod moduli;
pub mod numeric;
pub mod rescale;
pub mod series;
pub mod tree;
