pub mod dataset;
pub mod demux;
pub mod eval;
pub mod lif;
pub mod reconstruct;
pub mod render;
