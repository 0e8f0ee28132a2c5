use std::collections::BTreeMap;

use crate::boolalg::{Address, TreeShape};
use crate::error::{LabError, Result};
use crate::permgrp::{FiniteGroup, Perm};
use crate::tree::element::Automorphism;

/// A tree automorphism known on the ball of radius `precision` around the
/// base vertex. `None` means the element is known exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallIsometry {
    element: Automorphism,
    precision: Option<usize>,
}

impl BallIsometry {
    pub fn exact(element: Automorphism) -> Self {
        BallIsometry {
            element,
            precision: None,
        }
    }

    /// The element restricted to the radius-`r` ball.
    pub fn truncated(element: Automorphism, r: usize) -> Self {
        BallIsometry {
            element,
            precision: Some(r),
        }
    }

    pub fn identity(shape: TreeShape) -> Self {
        BallIsometry::exact(Automorphism::identity(shape))
    }

    pub fn shape(&self) -> TreeShape {
        self.element.shape()
    }

    pub fn precision(&self) -> Option<usize> {
        self.precision
    }

    pub fn element(&self) -> &Automorphism {
        &self.element
    }

    /// Image of the base vertex.
    pub fn base_image(&self) -> Address {
        self.element.image(&Address::root())
    }

    fn within(&self, radius: usize, what: &str) -> Result<()> {
        match self.precision {
            Some(r) if radius > r => Err(LabError::PrecisionExhausted(format!(
                "{what} needs radius {radius}, element known to radius {r}"
            ))),
            _ => Ok(()),
        }
    }

    /// `self ∘ other`, with precision `min(p(other), p(self) − |other(v0)|)`
    /// floored at zero.
    pub fn compose(&self, other: &BallIsometry) -> BallIsometry {
        let shift = other.element.displacement();
        let from_self = self.precision.map(|p| p.saturating_sub(shift));
        let precision = match (from_self, other.precision) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        BallIsometry {
            element: self.element.compose(&other.element),
            precision,
        }
    }

    /// Inverse; a radius-`r` element yields radius `r − |g(v0)|`.
    pub fn inverse(&self) -> BallIsometry {
        BallIsometry {
            element: self.element.inverse(),
            precision: self
                .precision
                .map(|r| r.saturating_sub(self.element.displacement())),
        }
    }

    pub fn image(&self, v: &Address) -> Result<Address> {
        self.within(v.len(), "image")?;
        Ok(self.element.image(v))
    }

    /// Local action at `v`; needs the star of `v` inside the known ball.
    pub fn local_action(&self, v: &Address) -> Result<Perm> {
        self.within(v.len() + 1, "local action")?;
        Ok(self.element.local_action(v))
    }

    /// Whether every local action inside the known ball lies in `f`.
    pub fn in_universal_group(&self, f: &FiniteGroup) -> Result<bool> {
        let member = |p: &Perm| f.contains(p).unwrap_or(false);
        match self.precision {
            None => {
                f.closure()?;
                Ok(self.element.local_actions_within(&member))
            }
            Some(r) => {
                f.closure()?;
                let shape = self.shape();
                let mut sites = vec![Address::root()];
                sites.extend(shape.ball_addresses(r.saturating_sub(1)));
                Ok(sites.iter().all(|v| member(&self.element.local_action(v))))
            }
        }
    }

    /// Explicit table on the ball of radius `r` (which must be within precision).
    pub fn table(&self, r: usize) -> Result<BTreeMap<Address, Address>> {
        self.within(r, "table")?;
        let shape = self.shape();
        let mut out = BTreeMap::new();
        out.insert(Address::root(), self.base_image());
        for v in shape.ball_addresses(r) {
            let img = self.element.image(&v);
            out.insert(v, img);
        }
        Ok(out)
    }
}
