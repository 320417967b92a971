//! Mixed-radix indexing of the joint remaining-counter state `(u, v)`.
//!
//! Digit `i` of a player's index is the number of counters still in box `i`,
//! so every removal strictly lowers the linear index and a single ascending
//! pass visits successors before predecessors.

use crate::error::{GameError, Result};
use crate::strategy::Strategy;

pub(crate) struct JointSpace {
    /// Stride of box `i` within the row player's index, already scaled by
    /// the column player's block size.
    pub row_stride: Vec<usize>,
    pub col_stride: Vec<usize>,
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
    pub col_size: usize,
    pub size: usize,
}

fn strides(dims: &[usize]) -> (Vec<usize>, usize) {
    let mut s = Vec::with_capacity(dims.len());
    let mut acc = 1usize;
    for &d in dims {
        s.push(acc);
        acc *= d;
    }
    (s, acc)
}

impl JointSpace {
    pub fn new(me: &Strategy, them: &Strategy, cap: u128) -> Result<Self> {
        if me.boxes() != them.boxes() {
            return Err(GameError::arg(format!(
                "strategies {me} and {them} have different box counts"
            )));
        }
        let row_dims: Vec<usize> = me.counts().iter().map(|&c| c as usize + 1).collect();
        let col_dims: Vec<usize> = them.counts().iter().map(|&c| c as usize + 1).collect();
        let states: u128 = row_dims
            .iter()
            .chain(&col_dims)
            .map(|&d| d as u128)
            .product();
        if states > cap {
            return Err(GameError::Capacity { states, cap });
        }
        let (cs, col_size) = strides(&col_dims);
        let (rs, row_size) = strides(&row_dims);
        Ok(JointSpace {
            row_stride: rs.iter().map(|s| s * col_size).collect(),
            col_stride: cs,
            row_dims,
            col_dims,
            col_size,
            size: row_size * col_size,
        })
    }

    /// Visit every state in ascending index order with its digit vectors.
    pub fn for_each(&self, mut f: impl FnMut(usize, &[usize], &[usize])) {
        let k = self.row_dims.len();
        let mut u = vec![0usize; k];
        let mut v = vec![0usize; k];
        for idx in 0..self.size {
            f(idx, &u, &v);
            // odometer over v, carrying into u
            let mut carried = true;
            for i in 0..k {
                v[i] += 1;
                if v[i] < self.col_dims[i] {
                    carried = false;
                    break;
                }
                v[i] = 0;
            }
            if carried {
                for i in 0..k {
                    u[i] += 1;
                    if u[i] < self.row_dims[i] {
                        break;
                    }
                    u[i] = 0;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_match_index() {
        let me = Strategy::new(vec![2, 0, 1]).unwrap();
        let them = Strategy::new(vec![1, 1, 1]).unwrap();
        let js = JointSpace::new(&me, &them, 1_000).unwrap();
        assert_eq!(js.size, 6 * 8);
        let mut seen = 0;
        js.for_each(|idx, u, v| {
            let rebuilt: usize = (0..3)
                .map(|i| u[i] * js.row_stride[i] + v[i] * js.col_stride[i])
                .sum();
            assert_eq!(rebuilt, idx);
            seen += 1;
        });
        assert_eq!(seen, js.size);
    }

    #[test]
    fn capacity_is_checked() {
        let me = Strategy::new(vec![9, 9]).unwrap();
        assert!(matches!(
            JointSpace::new(&me, &me, 9_999),
            Err(GameError::Capacity { states: 10_000, cap: 9_999 })
        ));
    }
}
