pub mod arith;
pub mod error;
pub mod field;
pub mod ideal;
pub mod characters;
pub mod coefficients;
pub mod twist;
pub mod oracle;
pub mod selftest;
pub mod cli;
