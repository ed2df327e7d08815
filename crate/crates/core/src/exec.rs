//! Execution mode for particle→node accumulations.
//!
//! `Serial` visits particles in index order with a single accumulator and is
//! bit-reproducible. `Parallel` splits particles into fixed-size chunks, gives
//! each chunk its own node buffer and reduces the buffers in chunk order, so it
//! is also reproducible run-to-run, but not bitwise equal to `Serial`.

use rayon::prelude::*;
use std::ops::AddAssign;

const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Serial,
    Parallel,
}

/// Accumulates per-item contributions into a dense node buffer of length `len`.
///
/// `visit(item, buffer)` adds the contribution of one item.
pub fn accumulate<T, F>(mode: ExecMode, len: usize, items: &[usize], visit: F) -> Vec<T>
where
    T: Copy + Default + AddAssign + Send + Sync,
    F: Fn(usize, &mut [T]) + Sync,
{
    match mode {
        ExecMode::Parallel if items.len() > CHUNK => {
            let partials: Vec<Vec<T>> = items
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut buf = vec![T::default(); len];
                    for &item in chunk {
                        visit(item, &mut buf);
                    }
                    buf
                })
                .collect();
            let mut out = vec![T::default(); len];
            for part in partials {
                for (o, v) in out.iter_mut().zip(part) {
                    *o += v;
                }
            }
            out
        }
        _ => {
            let mut out = vec![T::default(); len];
            for &item in items {
                visit(item, &mut out);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_serial_sum() {
        let items: Vec<usize> = (0..10_000).collect();
        let visit = |i: usize, buf: &mut [f64]| buf[i % 7] += i as f64;
        let a = accumulate(ExecMode::Serial, 7, &items, visit);
        let b = accumulate(ExecMode::Parallel, 7, &items, visit);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * x.abs());
        }
        let c = accumulate(ExecMode::Parallel, 7, &items, visit);
        assert_eq!(b, c);
    }
}
