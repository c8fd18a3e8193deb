use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::states::{BellKind, DensityOperator};

/// Largest operator the dense backend accepts.
pub const DENSE_LIMIT: usize = 4096;
/// `Backend::Auto` switches from dense to iterative above this dimension.
pub const AUTO_DENSE_LIMIT: usize = 1024;
/// Largest operator the iterative backend accepts.
pub const ITERATIVE_LIMIT: usize = 1 << 20;

/// Party whose systems are extended.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Side {
    Alice,
    #[default]
    Bob,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Dense when small, iterative otherwise.
    #[default]
    Auto,
    Dense,
    Iterative,
    /// Symmetry-reduced blocks; Werner states with one extension only.
    S3Blocks,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Auto => "auto",
            Backend::Dense => "dense",
            Backend::Iterative => "iterative",
            Backend::S3Blocks => "s3_blocks",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Backend::Auto),
            "dense" => Ok(Backend::Dense),
            "iterative" => Ok(Backend::Iterative),
            "s3_blocks" | "s3" => Ok(Backend::S3Blocks),
            _ => Err(Error::InvalidParameter(format!("unknown backend `{s}`"))),
        }
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice" => Ok(Side::Alice),
            "bob" => Ok(Side::Bob),
            _ => Err(Error::InvalidParameter(format!("unknown side `{s}`"))),
        }
    }
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi_plus" => Ok(BellKind::PhiPlus),
            "psi_minus" => Ok(BellKind::PsiMinus),
            _ => Err(Error::InvalidParameter(format!("unknown Bell state `{s}`"))),
        }
    }
}

/// Threshold problem for `n` copies of a bipartite state and `k` extensions.
#[derive(Clone, Debug)]
pub struct KExtProblem {
    state: DensityOperator,
    copies: usize,
    extensions: usize,
    side: Side,
    bell: BellKind,
    backend: Backend,
}

impl KExtProblem {
    pub fn new(state: DensityOperator, copies: usize, extensions: usize) -> Result<Self> {
        let p = Self {
            state,
            copies,
            extensions,
            side: Side::Bob,
            bell: BellKind::PhiPlus,
            backend: Backend::Auto,
        };
        p.validate_shape()?;
        Ok(p)
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_bell(mut self, bell: BellKind) -> Self {
        self.bell = bell;
        self
    }

    /// Sets the backend, failing if the problem exceeds its budget.
    pub fn with_backend(mut self, backend: Backend) -> Result<Self> {
        self.backend = backend;
        self.resolved_backend()?;
        Ok(self)
    }

    fn validate_shape(&self) -> Result<()> {
        if self.state.layout().len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected a bipartite state, got layout `{}`",
                self.state.layout()
            )));
        }
        if self.copies == 0 {
            return Err(Error::InvalidParameter("copies must be at least 1".into()));
        }
        if self.extensions == 0 {
            return Err(Error::InvalidParameter("extensions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn extensions(&self) -> usize {
        self.extensions
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn bell(&self) -> BellKind {
        self.bell
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `(d_A, d_B)` of the state after accounting for the extended side.
    pub(crate) fn party_dims(&self) -> (usize, usize) {
        let dims = self.state.layout().dims();
        match self.side {
            Side::Bob => (dims[0], dims[1]),
            Side::Alice => (dims[1], dims[0]),
        }
    }

    /// `d_A^n · d_B^{n(k+1)} · 2^{k+2}`, or `None` on overflow.
    pub fn total_dim(&self) -> Option<usize> {
        let (da, db) = self.party_dims();
        let n = u32::try_from(self.copies).ok()?;
        let k1 = u32::try_from(self.extensions + 1).ok()?;
        da.checked_pow(n)?
            .checked_mul(db.checked_pow(n.checked_mul(k1)?)?)?
            .checked_mul(2usize.checked_pow(k1 + 1)?)
    }

    /// The backend actually used, with budgets enforced.
    pub fn resolved_backend(&self) -> Result<Backend> {
        let dim = self.total_dim().unwrap_or(usize::MAX);
        let over = |backend: &'static str, limit: usize| Error::BudgetExceeded { backend, dim, limit };
        match self.backend {
            Backend::Auto if dim <= AUTO_DENSE_LIMIT => Ok(Backend::Dense),
            Backend::Auto if dim <= ITERATIVE_LIMIT => Ok(Backend::Iterative),
            Backend::Auto => Err(over("iterative", ITERATIVE_LIMIT)),
            Backend::Dense if dim <= DENSE_LIMIT => Ok(Backend::Dense),
            Backend::Dense => Err(over("dense", DENSE_LIMIT)),
            Backend::Iterative if dim <= ITERATIVE_LIMIT => Ok(Backend::Iterative),
            Backend::Iterative => Err(over("iterative", ITERATIVE_LIMIT)),
            Backend::S3Blocks => {
                if self.extensions != 1 {
                    return Err(Error::InvalidParameter(
                        "s3_blocks supports exactly one extension".into(),
                    ));
                }
                if self.state.werner().is_none() {
                    return Err(Error::InvalidParameter("s3_blocks requires a Werner state".into()));
                }
                Ok(Backend::S3Blocks)
            }
        }
    }
}
