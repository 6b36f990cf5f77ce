use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Keep(usize, usize),
    Substitute(usize, usize),
    Delete(usize),
    Insert(usize),
}

impl Op {
    pub fn is_keep(self) -> bool {
        matches!(self, Op::Keep(..))
    }

    /// Original-side index touched by the op.
    pub fn original(self) -> Option<usize> {
        match self {
            Op::Keep(i, _) | Op::Substitute(i, _) | Op::Delete(i) => Some(i),
            Op::Insert(_) => None,
        }
    }

    /// Corrected-side index touched by the op.
    pub fn corrected(self) -> Option<usize> {
        match self {
            Op::Keep(_, j) | Op::Substitute(_, j) | Op::Insert(j) => Some(j),
            Op::Delete(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub ops: Vec<Op>,
    pub cost: usize,
}

impl Alignment {
    /// Replays the ops on `original`, taking inserted and substituted
    /// tokens from `corrected`.
    pub fn replay<T: Clone>(&self, original: &[T], corrected: &[T]) -> Vec<T> {
        self.ops
            .iter()
            .filter_map(|op| match *op {
                Op::Keep(i, _) => Some(original[i].clone()),
                Op::Substitute(_, j) | Op::Insert(j) => Some(corrected[j].clone()),
                Op::Delete(_) => None,
            })
            .collect()
    }

    /// Corrected-side position of every op: for a delete, the index of the
    /// next corrected token.
    pub fn corrected_positions(&self) -> Vec<usize> {
        let mut j = 0;
        self.ops
            .iter()
            .map(|op| match op.corrected() {
                Some(c) => {
                    j = c + 1;
                    c
                }
                None => j,
            })
            .collect()
    }
}

/// Minimum unit-cost edit script from `a` to `b`.
///
/// The table holds suffix distances, so a forward walk can pick ops greedily:
/// keep first, then substitute, delete, insert. Keeps are therefore taken as
/// early as possible.
pub fn align<T: PartialEq>(a: &[T], b: &[T]) -> Alignment {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            d[i * w + j] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else {
                let sub = d[(i + 1) * w + j + 1] + usize::from(a[i] != b[j]);
                sub.min(d[(i + 1) * w + j] + 1).min(d[i * w + j + 1] + 1)
            };
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let here = d[i * w + j];
        if i < n && j < m && a[i] == b[j] && here == d[(i + 1) * w + j + 1] {
            ops.push(Op::Keep(i, j));
            i += 1;
            j += 1;
        } else if i < n && j < m && here == d[(i + 1) * w + j + 1] + 1 {
            ops.push(Op::Substitute(i, j));
            i += 1;
            j += 1;
        } else if i < n && here == d[(i + 1) * w + j] + 1 {
            ops.push(Op::Delete(i));
            i += 1;
        } else {
            ops.push(Op::Insert(j));
            j += 1;
        }
    }
    Alignment { ops, cost: d[0] }
}
