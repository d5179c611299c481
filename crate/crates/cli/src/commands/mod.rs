pub mod backpredict;
pub mod compare;
pub mod generate;
pub mod predict;
pub mod serve;
pub mod train;
