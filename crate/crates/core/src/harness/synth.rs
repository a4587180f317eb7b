//! Clustered synthetic user positions, a stand-in for vessel data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ais::BoundingBox;
use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, User, UserSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub clusters: usize,
    /// Radius, in degrees of arc on the ground, of the disc users are drawn
    /// from around their cluster centre.
    pub spread_deg: f64,
    pub bbox: BoundingBox,
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::Validation("need at least one cluster".into()));
        }
        if !(self.spread_deg >= 0.0 && self.spread_deg.is_finite()) {
            return Err(Error::Validation(format!(
                "spread {} must be finite and non-negative",
                self.spread_deg
            )));
        }
        self.bbox.validate()
    }
}

/// Draws `clusters` centres uniformly in the box. The first user of each
/// cluster sits on its centre; every further user picks a cluster uniformly
/// and lands uniformly in the disc of radius `spread_deg` around it.
pub fn synthesize_users(n: usize, params: &SynthParams, seed: u64) -> Result<UserSet> {
    params.validate()?;
    if n == 0 {
        return Err(Error::Validation("need at least one user".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = &params.bbox;
    let centres: Vec<(f64, f64)> = (0..params.clusters)
        .map(|_| {
            let lat = rng.random_range(b.south..=b.north);
            let lon = wrap_lon(b.west + rng.random_range(0.0..=b.lon_span()));
            (lat, lon)
        })
        .collect();
    let mut users = Vec::with_capacity(n);
    for k in 0..n {
        let (clat, clon) = if k < params.clusters {
            centres[k]
        } else {
            let c = centres[rng.random_range(0..params.clusters)];
            let r = params.spread_deg * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let lat = (c.0 + r * theta.cos()).clamp(-90.0, 90.0);
            let shrink = c.0.to_radians().cos().max(1e-6);
            (lat, wrap_lon(c.1 + r * theta.sin() / shrink))
        };
        users.push(User {
            id: format!("u{k}"),
            position: GeoPoint::surface(clat, clon)?,
        });
    }
    UserSet::new(users)
}

fn wrap_lon(lon: f64) -> f64 {
    if (-180.0..=180.0).contains(&lon) {
        lon
    } else {
        (lon + 180.0).rem_euclid(360.0) - 180.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(clusters: usize, spread_deg: f64) -> SynthParams {
        SynthParams {
            clusters,
            spread_deg,
            bbox: BoundingBox::new(-98.0, 18.0, -80.0, 31.0).unwrap(),
        }
    }

    #[test]
    fn single_user_sits_on_a_centre() {
        let p = params(3, 0.5);
        let one = synthesize_users(1, &p, 4).unwrap();
        let many = synthesize_users(10, &p, 4).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.users[0], many.users[0]);
        assert!(p.bbox.contains(one.users[0].position.latitude, one.users[0].position.longitude));
    }

    #[test]
    fn zero_spread_collapses_clusters() {
        let set = synthesize_users(40, &params(4, 0.0), 1).unwrap();
        let mut distinct: Vec<(u64, u64)> = set
            .users
            .iter()
            .map(|u| (u.position.latitude.to_bits(), u.position.longitude.to_bits()))
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        assert!(distinct.len() <= 4);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = params(5, 0.3);
        assert_eq!(synthesize_users(50, &p, 9).unwrap(), synthesize_users(50, &p, 9).unwrap());
        assert_ne!(synthesize_users(50, &p, 9).unwrap(), synthesize_users(50, &p, 10).unwrap());
    }

    #[test]
    fn users_stay_near_their_centre() {
        let p = params(1, 0.25);
        let set = synthesize_users(200, &p, 2).unwrap();
        let c = set.users[0].position;
        let shrink = c.latitude.to_radians().cos();
        for u in &set.users {
            let dlat = u.position.latitude - c.latitude;
            let dlon = (u.position.longitude - c.longitude) * shrink;
            assert!(dlat.hypot(dlon) <= 0.25 + 1e-9);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(synthesize_users(0, &params(1, 0.1), 0).is_err());
        assert!(synthesize_users(3, &params(0, 0.1), 0).is_err());
        assert!(synthesize_users(3, &params(1, -1.0), 0).is_err());
        assert_eq!(wrap_lon(181.0), -179.0);
        assert_eq!(wrap_lon(-190.0), 170.0);
    }
}
