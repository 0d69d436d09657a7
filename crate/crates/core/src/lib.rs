pub mod board;
pub mod cli;
pub mod dataset;
pub mod engine;
pub mod movegen;
pub mod notation;
pub mod reward;
