#![allow(dead_code)]

use curkit::cur::IndexList;
use curkit::linalg::{numerical_rank, take_block};
use curkit::random::{gen_lowrank, RngStream};
use curkit::Matrix;

/// Distinct indices drawn uniformly from `0..bound`.
pub fn distinct(rng: &mut RngStream, bound: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..bound).collect();
    for i in 0..count {
        let j = i + (rng.uniform() * (bound - i) as f64) as usize;
        pool.swap(i, j.min(bound - 1));
    }
    pool.truncate(count);
    pool
}

/// Random rank-`k` matrix together with index sets satisfying `rank(U) = k`.
pub fn exact_instance(rng: &mut RngStream, m: usize, n: usize, k: usize, p: usize, q: usize) -> (Matrix, IndexList, IndexList) {
    let a = gen_lowrank(m, n, k, rng, true).unwrap();
    loop {
        let rows = distinct(rng, m, p);
        let cols = distinct(rng, n, q);
        if numerical_rank(&take_block(&a, &rows, &cols), None).unwrap() == k {
            return (a, IndexList::new(rows, m).unwrap(), IndexList::new(cols, n).unwrap());
        }
    }
}
