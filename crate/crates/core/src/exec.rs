use ndarray::{Array2, ArrayViewMut1, Axis};
use rayon::prelude::*;

/// How row loops are scheduled.
///
/// Both modes run the same per-node arithmetic and every reduction stays
/// sequential, so results agree bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Sequential,
    Parallel,
}

impl Exec {
    pub fn from_parallel(parallel: bool) -> Self {
        if parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Calls `f(i, row_i)` for every row of `out`.
pub(crate) fn for_each_row<F>(out: &mut Array2<f64>, exec: Exec, f: F)
where
    F: Fn(usize, ArrayViewMut1<'_, f64>) + Sync + Send,
{
    match exec {
        Exec::Sequential => out
            .axis_iter_mut(Axis(0))
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
        Exec::Parallel => out
            .axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
    }
}
