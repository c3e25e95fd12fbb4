pub mod bench;
pub mod cost;
pub mod gen;
pub mod index;
pub mod query;
