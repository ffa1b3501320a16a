//! Contact-set geometry on grids: find the set where two ordered grid
//! functions touch and a ball reaching it at exactly one node.

use thiserror::Error;

use super::grid::GridFunction;

/// Relative contact tolerance: nodes with `u0 − u1 ≤ tol·(1+|u0|)` count as
/// contact, since grid arithmetic cannot realize exact equality.
pub const CONTACT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ContactError {
    #[error("grids have different layouts")]
    LayoutMismatch,
    #[error("ordering u1 <= u0 fails at node {index:?} by {violation:.6e}")]
    NotOrdered { index: Vec<usize>, violation: f64 },
    #[error("contact set is empty")]
    NoContact,
    #[error("functions are identical at grid resolution")]
    Identical,
    #[error("no admissible contact ball exists at grid resolution")]
    NoBallFound,
}

/// A ball `B(x₀, 2r₀)` inside the domain that meets the contact set at exactly
/// one grid node `x₁` on its boundary shell.
#[derive(Debug, Clone)]
pub struct ContactGeometry {
    pub contact_nodes: Vec<Vec<usize>>,
    pub x0: Vec<f64>,
    pub x0_index: Vec<usize>,
    pub x1: Vec<f64>,
    pub x1_index: Vec<usize>,
    pub r0: f64,
}

/// Locate the contact set `K = {u1 == u0}` and a deterministic ball touching
/// it: among grid-node centers whose nearest contact node is unique and whose
/// concentric `3r₀`-ball stays inside the domain box, pick the one maximizing
/// `r₀`, ties broken by smallest row-major index.
pub fn contact_locator(
    u0: &GridFunction,
    u1: &GridFunction,
) -> Result<ContactGeometry, ContactError> {
    if !u0.layout_matches(u1) {
        return Err(ContactError::LayoutMismatch);
    }

    let mut contact = Vec::new();
    let mut all_contact = true;
    for idx in u0.indices() {
        let v0 = u0.value(&idx);
        let v1 = u1.value(&idx);
        let gap = v0 - v1;
        if gap < -CONTACT_TOL * (1.0 + v0.abs()) {
            return Err(ContactError::NotOrdered {
                index: idx,
                violation: -gap,
            });
        }
        if gap <= CONTACT_TOL * (1.0 + v0.abs()) {
            contact.push(idx);
        } else {
            all_contact = false;
        }
    }
    if contact.is_empty() {
        return Err(ContactError::NoContact);
    }
    if all_contact {
        return Err(ContactError::Identical);
    }

    let contact_coords: Vec<Vec<f64>> = contact.iter().map(|idx| u0.coords(idx)).collect();
    let d = u0.dim();
    let lo = u0.origin().to_vec();
    let hi: Vec<f64> = (0..d)
        .map(|k| u0.origin()[k] + u0.spacing()[k] * (u0.shape()[k] - 1) as f64)
        .collect();
    let tie_tol = 1e-9 * (1.0 + u0.max_spacing());

    let mut best: Option<(f64, Vec<usize>, usize)> = None; // (r0, center index, contact position)
    for idx in u0.indices() {
        let x = u0.coords(&idx);
        // distance to the contact set and uniqueness of the nearest node
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        let mut nearest = usize::MAX;
        for (c, cc) in contact_coords.iter().enumerate() {
            let dist = euclid(&x, cc);
            if dist < d1 {
                d2 = d1;
                d1 = dist;
                nearest = c;
            } else if dist < d2 {
                d2 = dist;
            }
        }
        if d1 <= tie_tol {
            continue; // center on the contact set
        }
        if d2 - d1 <= tie_tol {
            continue; // nearest contact node not unique
        }
        let r0 = 0.5 * d1;
        // the closed 3r0-ball must stay inside the domain box
        let fits = (0..d).all(|k| x[k] - lo[k] >= 3.0 * r0 - tie_tol && hi[k] - x[k] >= 3.0 * r0 - tie_tol);
        if !fits {
            continue;
        }
        let better = match &best {
            None => true,
            Some((best_r0, _, _)) => r0 > *best_r0 + tie_tol,
        };
        if better {
            best = Some((r0, idx, nearest));
        }
    }

    let (r0, x0_index, nearest) = best.ok_or(ContactError::NoBallFound)?;
    let x1_index = contact[nearest].clone();
    Ok(ContactGeometry {
        x0: u0.coords(&x0_index),
        x0_index,
        x1: contact_coords[nearest].clone(),
        x1_index,
        r0,
        contact_nodes: contact,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
