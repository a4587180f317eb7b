//! Vessel positions from AIS broadcast CSV files.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, User, UserSet};

const ID_COLUMNS: [&str; 3] = ["mmsi", "vessel_id", "id"];
const LAT_COLUMNS: [&str; 2] = ["lat", "latitude"];
const LON_COLUMNS: [&str; 2] = ["lon", "longitude"];

/// Longitude/latitude box in degrees. A box with `west > east` wraps
/// across the antimeridian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub west: f64,
    pub south: f64,
    pub east: f64,
    pub north: f64,
}

impl BoundingBox {
    pub fn new(west: f64, south: f64, east: f64, north: f64) -> Result<Self> {
        let b = Self {
            west,
            south,
            east,
            north,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let lon_ok = |v: f64| (-180.0..=180.0).contains(&v);
        let lat_ok = |v: f64| (-90.0..=90.0).contains(&v);
        if !(lon_ok(self.west) && lon_ok(self.east) && lat_ok(self.south) && lat_ok(self.north)) {
            return Err(Error::Validation(format!("bounding box {self} out of range")));
        }
        if self.south > self.north {
            return Err(Error::Validation(format!("bounding box {self} has south > north")));
        }
        Ok(())
    }

    pub fn contains(&self, latitude: f64, longitude: f64) -> bool {
        let lon_in = if self.west <= self.east {
            (self.west..=self.east).contains(&longitude)
        } else {
            longitude >= self.west || longitude <= self.east
        };
        lon_in && (self.south..=self.north).contains(&latitude)
    }

    pub fn lon_span(&self) -> f64 {
        if self.west <= self.east {
            self.east - self.west
        } else {
            360.0 - (self.west - self.east)
        }
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.west, self.south, self.east, self.north)
    }
}

/// Parses `west,south,east,north`.
impl FromStr for BoundingBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Validation(format!("bad bounding box {s:?}, expected w,s,e,n")))?;
        match parts[..] {
            [w, s, e, n] => Self::new(w, s, e, n),
            _ => Err(Error::Validation(format!(
                "bounding box {s:?} needs four values w,s,e,n"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AisLoad {
    pub users: UserSet,
    /// Rows that could not be parsed.
    pub skipped: usize,
    /// Parsed rows outside the box.
    pub outside: usize,
    /// Repeat reports of a vessel already kept.
    pub duplicates: usize,
}

pub fn load_ais_csv(path: impl AsRef<Path>, bbox: &BoundingBox) -> Result<AisLoad> {
    let file = std::fs::File::open(path.as_ref())?;
    read_ais(file, bbox)
}

/// Reads an AIS CSV with a header naming a vessel identifier (`MMSI`,
/// `vessel_id` or `id`) and `LAT`/`LON` columns, matched case-insensitively.
/// Keeps the first report of each vessel inside `bbox`.
pub fn read_ais<R: Read>(reader: R, bbox: &BoundingBox) -> Result<AisLoad> {
    bbox.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    let find = |names: &[&str]| names.iter().find_map(|n| headers.iter().position(|h| h == n));
    let (id_col, lat_col, lon_col) = (find(&ID_COLUMNS), find(&LAT_COLUMNS), find(&LON_COLUMNS));
    let (Some(id_col), Some(lat_col), Some(lon_col)) = (id_col, lat_col, lon_col) else {
        let mut missing = Vec::new();
        if id_col.is_none() {
            missing.push("MMSI (or vessel_id/id)");
        }
        if lat_col.is_none() {
            missing.push("LAT");
        }
        if lon_col.is_none() {
            missing.push("LON");
        }
        return Err(Error::Format(format!("AIS file lacks columns: {}", missing.join(", "))));
    };

    let mut out = AisLoad::default();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let Ok(row) = row else {
            out.skipped += 1;
            continue;
        };
        let parsed = (|| {
            let id = row.get(id_col).filter(|s| !s.is_empty())?;
            let lat: f64 = row.get(lat_col)?.parse().ok()?;
            let lon: f64 = row.get(lon_col)?.parse().ok()?;
            let p = GeoPoint::surface(lat, lon).ok()?;
            Some((id.to_string(), p))
        })();
        let Some((id, position)) = parsed else {
            out.skipped += 1;
            continue;
        };
        if !bbox.contains(position.latitude, position.longitude) {
            out.outside += 1;
            continue;
        }
        if !seen.insert(id.clone()) {
            out.duplicates += 1;
            continue;
        }
        out.users.users.push(User { id, position });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gulf() -> BoundingBox {
        BoundingBox::new(-98.0, 18.0, -80.0, 31.0).unwrap()
    }

    #[test]
    fn header_only_file_is_empty() {
        let load = read_ais("MMSI,BaseDateTime,LAT,LON\n".as_bytes(), &gulf()).unwrap();
        assert!(load.users.is_empty());
        assert_eq!(load.skipped, 0);
    }

    #[test]
    fn keeps_first_report_per_vessel() {
        let text = "MMSI,LAT,LON\n111,25.0,-90.0\n111,26.0,-91.0\n";
        let load = read_ais(text.as_bytes(), &gulf()).unwrap();
        assert_eq!(load.users.len(), 1);
        assert_eq!(load.users.users[0].position.latitude, 25.0);
        assert_eq!(load.duplicates, 1);
    }

    #[test]
    fn filters_to_the_box() {
        let text = "mmsi,lat,lon\n\
                    1,25.0,-90.0\n\
                    2,40.0,-90.0\n\
                    3,20.0,-85.0\n\
                    4,25.0,-120.0\n\
                    5,30.5,-81.0\n";
        let load = read_ais(text.as_bytes(), &gulf()).unwrap();
        let ids: Vec<&str> = load.users.users.iter().map(|u| u.id.as_str()).collect();
        assert_eq!(ids, ["1", "3", "5"]);
        assert_eq!(load.outside, 2);
    }

    #[test]
    fn alternate_headers_and_bad_rows() {
        let text = "Vessel_ID,Latitude,Longitude,Speed\nA,25,-90,1\nB,abc,-90,2\nC,95,-90,3\n,25,-90,4\nD,26,-91\n";
        let load = read_ais(text.as_bytes(), &gulf()).unwrap();
        // A and the short row D survive; B, C and the blank id are skipped.
        assert_eq!(load.users.len(), 2);
        assert_eq!(load.skipped, 3);
        let load = read_ais("id,lat,lon\nx,25,-90\n".as_bytes(), &gulf()).unwrap();
        assert_eq!(load.users.users[0].id, "x");
    }

    #[test]
    fn missing_columns_are_named() {
        let err = read_ais("MMSI,LAT\n1,2\n".as_bytes(), &gulf()).unwrap_err();
        match err {
            Error::Format(msg) => {
                assert!(msg.ends_with("columns: LON"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        let err = read_ais("name,x,y\n".as_bytes(), &gulf()).unwrap_err();
        assert!(err.to_string().contains("MMSI"));
    }

    #[test]
    fn bbox_parsing_and_wrapping() {
        let b: BoundingBox = "-98, 18, -80, 31".parse().unwrap();
        assert_eq!(b, gulf());
        assert!("1,2,3".parse::<BoundingBox>().is_err());
        assert!("a,b,c,d".parse::<BoundingBox>().is_err());
        assert!("0,10,1,5".parse::<BoundingBox>().is_err());
        let pacific = BoundingBox::new(170.0, -10.0, -170.0, 10.0).unwrap();
        assert!(pacific.contains(0.0, 179.0));
        assert!(pacific.contains(0.0, -175.0));
        assert!(!pacific.contains(0.0, 0.0));
        assert_eq!(pacific.lon_span(), 20.0);
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ais.csv");
        std::fs::write(&path, "MMSI,LAT,LON\n7,25,-90\n").unwrap();
        assert_eq!(load_ais_csv(&path, &gulf()).unwrap().users.len(), 1);
        assert!(matches!(load_ais_csv(dir.path().join("none.csv"), &gulf()), Err(Error::Io(_))));
    }
}
