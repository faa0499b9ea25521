//! Constrained random network geometry.
//!
//! Base stations and mobiles are placed in a disk of radius `r_net` by
//! sequential rejection: each point is drawn uniformly over the disk and
//! redrawn while it violates an exclusion zone of an already-placed point.
//! Base stations go first, then mobiles. Every base station carries three
//! ideal sectors of width 2π/3 whose boundary angles are shared network-wide.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{path_gain, ShadowField};
use crate::error::{Error, Result};

pub const SECTORS_PER_BS: usize = 3;
pub const SECTOR_WIDTH: f64 = TAU / SECTORS_PER_BS as f64;
pub const DEFAULT_MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Point::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Direction of `other` as seen from `self`, in `(-π, π]`.
    pub fn bearing_to(&self, other: &Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub base_stations: usize,
    pub mobiles: usize,
    pub r_net: f64,
    pub r_bs: f64,
    pub r_m: f64,
    /// Minimum mobile-to-base-station distance; `None` means `r_bs`.
    #[serde(default)]
    pub mobile_clearance: Option<f64>,
    /// Orientation of the first sector boundary, radians.
    pub sector_offset: f64,
    /// Redraw cap per point before giving up.
    pub max_attempts: usize,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            base_stations: 50,
            mobiles: 400,
            r_net: 2.0,
            r_bs: 0.25,
            r_m: 0.01,
            mobile_clearance: None,
            sector_offset: 0.0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl TopologyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.base_stations == 0 {
            return bad("at least one base station is required");
        }
        if !(self.r_net.is_finite() && self.r_net > 0.0) {
            return bad("r_net must be positive");
        }
        // r_bs >= r_net is not rejected here; an unsatisfiable exclusion
        // zone surfaces as PlacementInfeasible.
        if !(self.r_bs.is_finite() && self.r_bs > 0.0) {
            return bad("r_bs must be positive");
        }
        if !(self.r_m.is_finite() && self.r_m > 0.0 && self.r_m <= self.r_bs) {
            return bad("r_m must satisfy 0 < r_m <= r_bs");
        }
        if let Some(c) = self.mobile_clearance {
            if !(c.is_finite() && c > 0.0) {
                return bad("mobile_clearance must be positive");
            }
        }
        if !self.sector_offset.is_finite() {
            return bad("sector_offset must be finite");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        Ok(())
    }

    pub fn mobile_clearance(&self) -> f64 {
        self.mobile_clearance.unwrap_or(self.r_bs)
    }

    pub fn sector_count(&self) -> usize {
        SECTORS_PER_BS * self.base_stations
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.r_net * self.r_net
    }
}

/// Flat sector index `3 * bs + sector`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorId(pub usize);

impl SectorId {
    pub fn new(bs: usize, sector: usize) -> Self {
        debug_assert!(sector < SECTORS_PER_BS);
        SectorId(SECTORS_PER_BS * bs + sector)
    }

    pub fn bs(self) -> usize {
        self.0 / SECTORS_PER_BS
    }

    pub fn sector(self) -> usize {
        self.0 % SECTORS_PER_BS
    }
}

/// Sector index covering a bearing, half-open intervals
/// `[offset + s·2π/3, offset + (s+1)·2π/3)`.
pub fn sector_of_bearing(bearing: f64, offset: f64) -> usize {
    let rel = (bearing - offset).rem_euclid(TAU);
    let s = (rel / SECTOR_WIDTH).floor() as usize;
    // rem_euclid can round up to exactly TAU
    s.min(SECTORS_PER_BS - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub params: TopologyParams,
    pub bs_positions: Vec<Point>,
    pub mobile_positions: Vec<Point>,
}

/// Mobile index to serving sector.
pub type Association = Vec<SectorId>;

fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = TAU * rng.random::<f64>();
    Point::from_polar(r, theta)
}

pub fn generate_topology<R: Rng + ?Sized>(params: &TopologyParams, rng: &mut R) -> Result<Topology> {
    params.validate()?;

    let mut bs_positions = Vec::with_capacity(params.base_stations);
    for index in 0..params.base_stations {
        let p = place(rng, params, "base station", index, |p| {
            bs_positions.iter().all(|b: &Point| b.distance(p) >= params.r_bs)
        })?;
        bs_positions.push(p);
    }

    let clearance = params.mobile_clearance();
    let mut mobile_positions = Vec::with_capacity(params.mobiles);
    for index in 0..params.mobiles {
        let p = place(rng, params, "mobile", index, |p| {
            bs_positions.iter().all(|b| b.distance(p) >= clearance)
                && mobile_positions.iter().all(|m: &Point| m.distance(p) >= params.r_m)
        })?;
        mobile_positions.push(p);
    }

    Ok(Topology {
        params: params.clone(),
        bs_positions,
        mobile_positions,
    })
}

fn place<R, F>(rng: &mut R, params: &TopologyParams, kind: &'static str, index: usize, accept: F) -> Result<Point>
where
    R: Rng + ?Sized,
    F: Fn(&Point) -> bool,
{
    for _ in 0..params.max_attempts {
        let p = uniform_in_disk(rng, params.r_net);
        if accept(&p) {
            return Ok(p);
        }
    }
    Err(Error::PlacementInfeasible {
        kind,
        index,
        attempts: params.max_attempts,
    })
}

impl Topology {
    pub fn base_station_count(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn mobile_count(&self) -> usize {
        self.mobile_positions.len()
    }

    pub fn sector_position(&self, j: SectorId) -> Point {
        self.bs_positions[j.bs()]
    }

    /// Distance from base station `bs` to mobile `i`.
    pub fn distance(&self, bs: usize, i: usize) -> f64 {
        self.bs_positions[bs].distance(&self.mobile_positions[i])
    }

    /// The sector of base station `bs` whose angular interval contains mobile `i`.
    pub fn covering_sector(&self, bs: usize, i: usize) -> SectorId {
        let bearing = self.bs_positions[bs].bearing_to(&self.mobile_positions[i]);
        SectorId::new(bs, sector_of_bearing(bearing, self.params.sector_offset))
    }

    pub fn covers(&self, j: SectorId, i: usize) -> bool {
        self.covering_sector(j.bs(), i) == j
    }

    /// Serving sector per mobile: the covering antenna with the largest
    /// shadowed path gain. Ties go to the lowest sector id.
    pub fn associate(&self, shadow: &ShadowField, alpha: f64) -> Result<Association> {
        if shadow.mobiles() != self.mobile_count() || shadow.base_stations() != self.base_station_count() {
            return Err(Error::Domain(format!(
                "shadow field is {}x{}, topology has {} mobiles and {} base stations",
                shadow.mobiles(),
                shadow.base_stations(),
                self.mobile_count(),
                self.base_station_count()
            )));
        }
        (0..self.mobile_count())
            .map(|i| {
                let mut best: Option<(usize, f64)> = None;
                for bs in 0..self.base_station_count() {
                    let gain = shadow.linear(i, bs) * path_gain(self.distance(bs, i), alpha)?;
                    if best.is_none_or(|(_, g)| gain > g) {
                        best = Some((bs, gain));
                    }
                }
                let (bs, _) = best.expect("at least one base station");
                Ok(self.covering_sector(bs, i))
            })
            .collect()
    }

    /// Checks every exclusion-zone invariant, returning the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let p = &self.params;
        for (k, pt) in self.bs_positions.iter().chain(&self.mobile_positions).enumerate() {
            if !(pt.x.is_finite() && pt.y.is_finite()) || pt.norm() > p.r_net {
                return Err(format!("point {k} outside the network disk"));
            }
        }
        for (a, pa) in self.bs_positions.iter().enumerate() {
            for (b, pb) in self.bs_positions.iter().enumerate().skip(a + 1) {
                if pa.distance(pb) < p.r_bs {
                    return Err(format!("base stations {a} and {b} closer than r_bs"));
                }
            }
            for (i, m) in self.mobile_positions.iter().enumerate() {
                if pa.distance(m) < p.mobile_clearance() {
                    return Err(format!("mobile {i} inside exclusion zone of base station {a}"));
                }
            }
        }
        for (a, pa) in self.mobile_positions.iter().enumerate() {
            for (b, pb) in self.mobile_positions.iter().enumerate().skip(a + 1) {
                if pa.distance(pb) < p.r_m {
                    return Err(format!("mobiles {a} and {b} closer than r_m"));
                }
            }
        }
        Ok(())
    }

    /// Serializes positions as `kind,index,x,y` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let rows = self
            .bs_positions
            .iter()
            .enumerate()
            .map(|(index, p)| (PointKind::Bs, index, p))
            .chain(
                self.mobile_positions
                    .iter()
                    .enumerate()
                    .map(|(index, p)| (PointKind::Mobile, index, p)),
            );
        for (kind, index, p) in rows {
            w.serialize(CsvRow {
                kind,
                index,
                x: p.x,
                y: p.y,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads positions written by [`Topology::write_csv`]. Base-station and
    /// mobile counts in `params` are replaced by what the file contains.
    pub fn read_csv<R: Read>(reader: R, mut params: TopologyParams) -> std::result::Result<Topology, csv::Error> {
        let mut bs = Vec::new();
        let mut mobiles = Vec::new();
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: CsvRow = row?;
            let list = match row.kind {
                PointKind::Bs => &mut bs,
                PointKind::Mobile => &mut mobiles,
            };
            if list.len() <= row.index {
                list.resize(row.index + 1, Point::ORIGIN);
            }
            list[row.index] = Point::new(row.x, row.y);
        }
        params.base_stations = bs.len();
        params.mobiles = mobiles.len();
        Ok(Topology {
            params,
            bs_positions: bs,
            mobile_positions: mobiles,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PointKind {
    Bs,
    Mobile,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    kind: PointKind,
    index: usize,
    x: f64,
    y: f64,
}
