//! Flexibility at hyperbolic points: lifted flows span the tangent space.

use num_traits::Zero;

use super::{LevelPoint, Multiplier, Suspension};
use crate::error::{Error, Result};
use crate::geometry::BaseGeometry;
use crate::linalg::rank_fraction_free;
use crate::scalar::Rational;
use crate::tower::Side;

#[derive(Debug, Clone)]
pub struct FlexCertificate<F> {
    /// Tangent vectors of the lifted flows, one row each, in the
    /// coordinates of the ambient space.
    pub matrix: Vec<Vec<Rational>>,
    pub rank: usize,
    /// Dimension of the suspension.
    pub dim: usize,
    /// Base flow, side and multiplier of each row.
    pub flows: Vec<(F, Side, Multiplier)>,
}

impl<F> FlexCertificate<F> {
    pub fn is_valid(&self) -> bool {
        self.rank == self.dim
    }
}

/// Rows: the base flexibility flows lifted along `v` with `q = v`, then the
/// first of them moving `f` lifted along `u` with `q = u`.
pub fn flexibility_certificate<B: BaseGeometry>(
    susp: &Suspension<B>,
    p: &LevelPoint<B::Point>,
) -> Result<FlexCertificate<B::Flow>> {
    susp.check(p)?;
    if !p.is_hyperbolic() {
        return Err(Error::Precondition("point is not hyperbolic".into()));
    }
    let geo = &susp.base;
    let q = Multiplier::linear();
    let base_flows = geo.flexibility_flows(&p.base)?;
    let mut flows = Vec::new();
    for fl in &base_flows {
        flows.push((fl.clone(), Side::V, q.clone()));
    }
    let mut extra = None;
    for fl in &base_flows {
        if !geo.flow_rate(fl, &susp.f, &p.base)?.is_zero() {
            extra = Some(fl.clone());
            break;
        }
    }
    flows.push((extra.ok_or(Error::NoFlexibleDirection)?, Side::U, q.clone()));
    let matrix = flows
        .iter()
        .map(|(fl, side, q)| susp.tangent(fl, *side, q, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(FlexCertificate {
        rank: rank_fraction_free(&matrix),
        dim: geo.dim() + 1,
        matrix,
        flows,
    })
}
