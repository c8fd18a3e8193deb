use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factors of a Hilbert space.
///
/// Composite indices are row-major: the first listed subsystem is the most
/// significant digit. Every reordering, transpose and partial trace in the
/// crate follows this convention.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    subsystems: Vec<Subsystem>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems = parts
            .into_iter()
            .map(|(label, dim)| Subsystem {
                label: label.into(),
                dim,
            })
            .collect::<Vec<_>>();
        for (i, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "subsystem `{}` has dimension 0",
                    s.label
                )));
            }
            if subsystems[..i].iter().any(|t| t.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(Self { subsystems })
    }

    /// Two-party layout `A ⊗ B`.
    pub fn bipartite(d_a: usize, d_b: usize) -> Self {
        Self::new([("A", d_a), ("B", d_b)]).expect("distinct labels")
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .chain(&other.subsystems)
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// Layout whose axis `t` is axis `order[t]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            subsystems: order.iter().map(|&i| self.subsystems[i].clone()).collect(),
        }
    }

    /// Same dimensions, new labels.
    pub fn relabeled<S: Into<String>>(&self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.len()
            )));
        }
        Self::new(labels.into_iter().zip(self.dims()))
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.subsystems.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}:{}", s.label, s.dim)?;
        }
        Ok(())
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Index map for an axis reordering.
///
/// The target tensor has axis `t` equal to source axis `order[t]`; entry
/// `map[i]` is the source flat index of target flat index `i`.
pub(crate) fn gather_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    debug_assert_eq!(dims.len(), order.len());
    let total: usize = dims.iter().product();
    let src_strides = strides(dims);
    let tdims: Vec<usize> = order.iter().map(|&a| dims[a]).collect();
    let tstrides: Vec<usize> = order.iter().map(|&a| src_strides[a]).collect();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    let mut src = 0usize;
    for _ in 0..total {
        map.push(src);
        for ax in (0..tdims.len()).rev() {
            digits[ax] += 1;
            src += tstrides[ax];
            if digits[ax] < tdims[ax] {
                break;
            }
            src -= tstrides[ax] * tdims[ax];
            digits[ax] = 0;
        }
    }
    map
}
