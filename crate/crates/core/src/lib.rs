pub mod audit;
pub mod cfi;
pub mod corpus;
pub mod exactla;
pub mod field;
pub mod graph;
pub mod partition;
pub mod poly;
pub mod refine;
