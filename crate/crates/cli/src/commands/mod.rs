pub mod fit;
pub mod gradcheck;
pub mod sample;
pub mod variance;
