use crate::linalg::Scalar;
use crate::partition::OverlappingDecomposition;

/// Binary restriction `R_i` onto the sorted dof list `V_i`; its transpose is
/// the prolongation `P_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionMap {
    pub subdomain: usize,
    pub dofs: Vec<usize>,
}

impl RestrictionMap {
    pub fn new(subdomain: usize, dofs: Vec<usize>) -> Self {
        debug_assert!(dofs.windows(2).all(|w| w[0] < w[1]));
        Self { subdomain, dofs }
    }

    pub fn local_dim(&self) -> usize {
        self.dofs.len()
    }

    /// `R_i x`.
    pub fn gather<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.dofs.iter().map(|&d| x[d]).collect()
    }

    /// `y += P_i v`.
    pub fn scatter_add<S: Scalar>(&self, v: &[S], y: &mut [S]) {
        for (&d, &a) in self.dofs.iter().zip(v) {
            y[d] += a;
        }
    }

    /// `P_i v` as a full-length vector.
    pub fn scatter<S: Scalar>(&self, v: &[S], n: usize) -> Vec<S> {
        let mut y = vec![S::zero(); n];
        self.scatter_add(v, &mut y);
        y
    }
}

/// How the diagonal `D_i` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    /// Binary weights, 1 on uniquely owned dofs.
    #[default]
    Restricted,
    /// Inverse multiplicity.
    Multiplicity,
}

/// Diagonal of `D_i`, one weight per local dof.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector {
    pub subdomain: usize,
    pub weights: Vec<f64>,
}

pub fn restriction(decomp: &OverlappingDecomposition, i: usize) -> RestrictionMap {
    RestrictionMap::new(i, decomp.subdomain(i).dofs.clone())
}

pub fn unique_owner_assignment(decomp: &OverlappingDecomposition) -> Vec<usize> {
    decomp.owner().to_vec()
}

pub fn scalings(decomp: &OverlappingDecomposition, mode: ScalingMode) -> Vec<ScalingVector> {
    let owner = decomp.owner();
    let mult = decomp.multiplicity();
    decomp
        .subdomains()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let weights = s
                .dofs
                .iter()
                .map(|&d| match mode {
                    ScalingMode::Restricted => f64::from(u8::from(owner[d] == i)),
                    ScalingMode::Multiplicity => 1.0 / mult[d] as f64,
                })
                .collect();
            ScalingVector { subdomain: i, weights }
        })
        .collect()
}
