#![allow(dead_code)]

pub mod bfs;
pub mod data;
pub mod dense;
pub mod grad_suites;
pub mod gradcheck;
pub mod iso;
pub mod kg;
pub mod sentinel;
