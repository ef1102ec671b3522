pub mod angle;
pub mod boundary;
pub mod cli;
pub mod branch;
pub mod continuation;
pub mod plant;
pub mod poly;
pub mod tracer;
