//! Diversity measures computed directly on a suite, without a distance
//! matrix: test set diameter (multiset compression distance) and the area of
//! the convex hull around all road curves.

use crate::geometry::{convex_hull_area, resample_uniform, GeometryError, RoadGeometry};
use flate2::write::ZlibEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write as _;
use thiserror::Error;

/// Points per road in the canonical serialization.
pub const SERIALIZED_POINTS: usize = 100;

#[derive(Debug, Error)]
pub enum DirectMeasureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("compressor failure: {0}")]
    CompressorFailure(#[from] std::io::Error),
    #[error("suite of {0} roads is too small")]
    SuiteTooSmall(usize),
}

/// Byte-stream compressor used to approximate Kolmogorov complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "codec", rename_all = "lowercase")]
pub enum Codec {
    Zlib { level: u32 },
}

impl Default for Codec {
    fn default() -> Self {
        Codec::Zlib { level: 9 }
    }
}

impl Codec {
    /// Identifier recorded next to every compression-based result.
    pub fn id(&self) -> String {
        match self {
            Codec::Zlib { level } => format!("zlib-{level}"),
        }
    }

    pub fn compressed_size(&self, bytes: &[u8]) -> Result<CompressedSize, DirectMeasureError> {
        match *self {
            Codec::Zlib { level } => {
                let mut enc = ZlibEncoder::new(Vec::new(), Compression::new(level.min(9)));
                enc.write_all(bytes)?;
                Ok(CompressedSize {
                    byte_count: enc.finish()?.len(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CompressedSize {
    pub byte_count: usize,
}

/// Canonical text form of a road: 100 arclength-uniform points, start at the
/// origin, first segment along +x, one `x y` pair per line at 3 decimals.
pub fn serialize_road(g: &RoadGeometry) -> Result<Vec<u8>, GeometryError> {
    let canon = resample_uniform(g, SERIALIZED_POINTS)?.canonical();
    let mut out = String::with_capacity(SERIALIZED_POINTS * 20);
    for p in canon.points() {
        let _ = writeln!(out, "{} {}", fixed3(p.x), fixed3(p.y));
    }
    Ok(out.into_bytes())
}

fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Multiset normalized compression distance of the suite:
/// `(C(X) - min_x C(X\x)) / max_x C(X\x)` where X concatenates the
/// serialized roads in road-id order.
pub fn test_set_diameter(suite: &[RoadGeometry], codec: Codec) -> Result<f64, DirectMeasureError> {
    if suite.len() < 2 {
        return Err(DirectMeasureError::SuiteTooSmall(suite.len()));
    }
    let mut items: Vec<(&str, Vec<u8>)> = suite
        .iter()
        .map(|g| Ok((g.id(), serialize_road(g)?)))
        .collect::<Result<_, GeometryError>>()?;
    items.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.cmp(&b.1)));
    let blobs: Vec<Vec<u8>> = items.into_iter().map(|(_, b)| b).collect();
    ncd_multiset(&blobs, codec)
}

/// Multiset NCD over already serialized items, concatenated in the given order.
pub fn ncd_multiset(items: &[Vec<u8>], codec: Codec) -> Result<f64, DirectMeasureError> {
    if items.len() < 2 {
        return Err(DirectMeasureError::SuiteTooSmall(items.len()));
    }
    let whole = codec.compressed_size(&items.concat())?.byte_count as f64;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for skip in 0..items.len() {
        let rest: Vec<u8> = items
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .flat_map(|(_, b)| b.iter().copied())
            .collect();
        let c = codec.compressed_size(&rest)?.byte_count as f64;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok(((whole - lo) / hi).max(0.0))
}

/// Area of the convex hull around all road points. With `aligned`, each road
/// is first moved to its canonical frame so only shape spread counts.
pub fn convex_hull_diversity(suite: &[RoadGeometry], aligned: bool) -> f64 {
    if aligned {
        let canon: Vec<Vec<_>> = suite.iter().map(|g| g.canonical().points().to_vec()).collect();
        convex_hull_area(&canon)
    } else {
        let raw: Vec<&[_]> = suite.iter().map(|g| g.points()).collect();
        convex_hull_area(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::testutil::{arc, straight};
    use crate::geometry::Point;

    fn wiggle(id: &str, seed: u64) -> RoadGeometry {
        let a = 3.0 + (seed % 7) as f64;
        let f = 10.0 + (seed % 5) as f64 * 4.0;
        let pts = (0..120)
            .map(|i| {
                let x = i as f64 * 1.5;
                Point::new(x, a * (x / f).sin() + 0.01 * (seed as f64) * x)
            })
            .collect();
        RoadGeometry::new(id, pts).unwrap()
    }

    #[test]
    fn serialization_is_canonical() {
        let g = wiggle("w", 3);
        let bytes = serialize_road(&g).unwrap();
        assert_eq!(bytes, serialize_road(&g).unwrap());
        let moved = g.transformed(Point::new(0.0, 0.0), 0.9, Point::new(-40.0, 17.0));
        assert_eq!(bytes, serialize_road(&moved).unwrap());
        assert_ne!(bytes, serialize_road(&wiggle("v", 4)).unwrap());
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), SERIALIZED_POINTS);
        assert!(text.starts_with("0.000 0.000\n"));
    }

    #[test]
    fn identical_suite_has_small_diameter() {
        let suite: Vec<RoadGeometry> = (0..10).map(|k| wiggle("w", 2).with_id(format!("r{k}"))).collect();
        let v = test_set_diameter(&suite, Codec::default()).unwrap();
        assert!(v <= 0.1, "{v}");
        let distinct: Vec<RoadGeometry> = (0..10).map(|k| wiggle(&format!("r{k}"), k)).collect();
        assert!(test_set_diameter(&distinct, Codec::default()).unwrap() > v);
    }

    #[test]
    fn two_road_diameter_matches_hand_formula() {
        let a = wiggle("a", 1);
        let b = wiggle("b", 6);
        let codec = Codec::default();
        let (sa, sb) = (serialize_road(&a).unwrap(), serialize_road(&b).unwrap());
        let c = |bytes: &[u8]| codec.compressed_size(bytes).unwrap().byte_count as f64;
        let cab = c(&[sa.clone(), sb.clone()].concat());
        let (ca, cb) = (c(&sa), c(&sb));
        let expected = (cab - ca.min(cb)) / ca.max(cb);
        assert_eq!(test_set_diameter(&[b, a], codec).unwrap(), expected);
    }

    #[test]
    fn diameter_rejects_singletons() {
        assert!(matches!(
            test_set_diameter(&[straight(10.0, 5)], Codec::default()),
            Err(DirectMeasureError::SuiteTooSmall(1))
        ));
    }

    #[test]
    fn hull_cases() {
        let s = straight(50.0, 11);
        assert_eq!(convex_hull_diversity(&[s.clone()], true), 0.0);
        let a = arc(20.0, 1.5, 40);
        let one = convex_hull_diversity(&[a.clone(), s.clone()], true);
        let twice = convex_hull_diversity(&[a.clone(), s.clone(), a.clone()], true);
        assert_eq!(one, twice);
        let more = convex_hull_diversity(&[a.clone(), s.clone(), a.mirrored()], true);
        assert!(more >= one);
        // unaligned: a rotated copy adds area
        let turned = s.transformed(Point::new(0.0, 0.0), 1.0, Point::new(0.0, 0.0));
        assert!(convex_hull_diversity(&[s.clone(), turned.clone()], true) < 1e-9);
        assert!(convex_hull_diversity(&[s, turned], false) > 0.0);
    }
}
