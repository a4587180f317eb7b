//! Satellite-centred angular geometry on a spherical Earth.
//!
//! Two users may share a beam when the angle they subtend at the satellite
//! is at most half the beam cone angle. Coordinates are converted to
//! Earth-centred Cartesian kilometres on a sphere of radius
//! [`EARTH_RADIUS_KM`]; only angles at the satellite matter downstream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ProximityGraph;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Degrees, [-90, 90].
    pub latitude: f64,
    /// Degrees, [-180, 180].
    pub longitude: f64,
    /// Kilometres above the surface.
    pub altitude: f64,
}

impl GeoPoint {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        let p = Self {
            latitude,
            longitude,
            altitude,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn surface(latitude: f64, longitude: f64) -> Result<Self> {
        Self::new(latitude, longitude, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::Validation(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::Validation(format!(
                "longitude {} outside [-180, 180]",
                self.longitude
            )));
        }
        if !(self.altitude >= 0.0 && self.altitude.is_finite()) {
            return Err(Error::Validation(format!(
                "altitude {} must be finite and non-negative",
                self.altitude
            )));
        }
        Ok(())
    }
}

/// Satellite position plus beam cone angle (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteGeometry {
    pub position: GeoPoint,
    pub cone_angle: f64,
}

impl SatelliteGeometry {
    pub fn new(position: GeoPoint, cone_angle: f64) -> Result<Self> {
        position.validate()?;
        if position.altitude <= 0.0 {
            return Err(Error::Validation(
                "satellite altitude must be strictly positive".into(),
            ));
        }
        if !(cone_angle > 0.0 && cone_angle < std::f64::consts::PI) {
            return Err(Error::Validation(format!(
                "cone angle {cone_angle} rad outside (0, pi)"
            )));
        }
        Ok(Self {
            position,
            cone_angle,
        })
    }

    pub fn from_degrees(position: GeoPoint, cone_angle_deg: f64) -> Result<Self> {
        Self::new(position, cone_angle_deg.to_radians())
    }

    /// Largest angular separation at which two users are still adjacent.
    pub fn edge_threshold(&self) -> f64 {
        self.cone_angle / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: String,
    pub position: GeoPoint,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserSet {
    pub users: Vec<User>,
}

impl UserSet {
    pub fn new(users: Vec<User>) -> Result<Self> {
        let set = Self { users };
        set.validate()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(self.users.len());
        for u in &self.users {
            u.position.validate()?;
            if u.position.altitude != 0.0 {
                return Err(Error::Validation(format!(
                    "user {} is not on the surface",
                    u.id
                )));
            }
            if !seen.insert(u.id.as_str()) {
                return Err(Error::Validation(format!("duplicate user id {}", u.id)));
            }
        }
        Ok(())
    }
}

pub fn to_ecef(p: &GeoPoint) -> Result<[f64; 3]> {
    p.validate()?;
    let r = EARTH_RADIUS_KM + p.altitude;
    let (lat, lon) = (p.latitude.to_radians(), p.longitude.to_radians());
    Ok([
        r * lat.cos() * lon.cos(),
        r * lat.cos() * lon.sin(),
        r * lat.sin(),
    ])
}

fn direction(from: [f64; 3], to: [f64; 3]) -> Result<[f64; 3]> {
    let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateGeometry(
            "user coincides with the satellite".into(),
        ));
    }
    Ok([d[0] / norm, d[1] / norm, d[2] / norm])
}

/// Angle in radians between the lines of sight from `sat` to `u` and to `v`.
pub fn angular_separation(sat: &GeoPoint, u: &GeoPoint, v: &GeoPoint) -> Result<f64> {
    if sat.altitude <= 0.0 {
        return Err(Error::Validation(
            "satellite must be strictly above the surface".into(),
        ));
    }
    let s = to_ecef(sat)?;
    let du = direction(s, to_ecef(u)?)?;
    let dv = direction(s, to_ecef(v)?)?;
    Ok(unit_angle(du, dv))
}

// atan2 of |cross| and dot stays accurate near 0 and pi, unlike acos.
fn unit_angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos)
}

/// Adjacency iff the angular separation at the satellite is at most
/// half the cone angle (the boundary counts as adjacent).
pub fn build_proximity_graph(users: &UserSet, geom: &SatelliteGeometry) -> Result<ProximityGraph> {
    if users.is_empty() {
        return Err(Error::Validation("user set is empty".into()));
    }
    let sat = to_ecef(&geom.position)?;
    let dirs = users
        .users
        .iter()
        .map(|u| to_ecef(&u.position).and_then(|p| direction(sat, p)))
        .collect::<Result<Vec<_>>>()?;
    let threshold = geom.edge_threshold();
    let mut graph = ProximityGraph::new(users.len());
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            if unit_angle(dirs[i], dirs[j]) <= threshold {
                graph.add_edge(i, j)?;
            }
        }
    }
    Ok(graph)
}
