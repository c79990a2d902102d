pub mod corpus;
pub mod decode;
pub mod encoder;
pub mod eval;
pub mod model;
pub mod prompt;
pub mod stats;
pub mod text;
pub mod train;
