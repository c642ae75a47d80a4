//! Spectral measures and their analytic transforms.
//!
//! A [`SpectralMeasure`] is either a finite atomic probability measure on the
//! real line, a finite atomic probability measure on the unit circle (atoms
//! given by their angle), or the Haar measure on the circle. Continuous laws
//! enter only through user supplied atomic discretizations, which turns every
//! integral against the measure into a finite sum.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the complex plane.
pub type ComplexPoint = Complex64;

/// Tolerance below which two atom locations are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;
/// Tolerance on the total mass of programmatically built measures.
pub const MASS_TOL: f64 = 1e-12;
/// Tolerance on the total mass of measures read from files; within it the
/// weights are renormalized.
pub const FILE_MASS_TOL: f64 = 1e-6;
/// Distance to an atom below which a transform is treated as singular.
pub const POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    RealAtomic,
    CircleAtomic,
    Haar,
}

impl MeasureKind {
    pub fn on_circle(self) -> bool {
        !matches!(self, MeasureKind::RealAtomic)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::RealAtomic => "real-atomic",
            MeasureKind::CircleAtomic => "circle-atomic",
            MeasureKind::Haar => "haar",
        })
    }
}

/// One atom: a real location or an angle in (−π, π], with its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    kind: MeasureKind,
    atoms: Vec<Atom>,
}

/// Maps an angle to its representative in (−π, π].
pub fn normalize_angle(theta: f64) -> f64 {
    let r = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Distance between two angles along the circle.
fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn check_finite(z: ComplexPoint, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl SpectralMeasure {
    /// Atomic measure on ℝ from `(location, weight)` pairs.
    pub fn real_atomic(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::build(MeasureKind::RealAtomic, atoms, MASS_TOL)
    }

    /// Atomic measure on the unit circle from `(angle, weight)` pairs.
    pub fn circle_atomic(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::build(MeasureKind::CircleAtomic, atoms, MASS_TOL)
    }

    pub fn haar() -> Self {
        SpectralMeasure {
            kind: MeasureKind::Haar,
            atoms: Vec::new(),
        }
    }

    /// The point mass δ_x on the real line.
    pub fn point_mass(x: f64) -> Result<Self> {
        Self::real_atomic([(x, 1.0)])
    }

    /// The point mass at e^{iθ} on the circle.
    pub fn circle_point_mass(theta: f64) -> Result<Self> {
        Self::circle_atomic([(theta, 1.0)])
    }

    fn build(
        kind: MeasureKind,
        atoms: impl IntoIterator<Item = (f64, f64)>,
        mass_tol: f64,
    ) -> Result<Self> {
        let mut list = Vec::new();
        for (loc, w) in atoms {
            if !loc.is_finite() || !w.is_finite() {
                return Err(Error::InvalidMeasure("non-finite atom".into()));
            }
            if w < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative weight {w}")));
            }
            let location = match kind {
                MeasureKind::CircleAtomic => normalize_angle(loc),
                _ => loc,
            };
            list.push(Atom {
                location,
                weight: w,
            });
        }
        match kind {
            MeasureKind::Haar if !list.is_empty() => {
                return Err(Error::InvalidMeasure(
                    "the haar measure carries no atoms".into(),
                ))
            }
            MeasureKind::Haar => return Ok(Self::haar()),
            _ if list.is_empty() => {
                return Err(Error::InvalidMeasure("atomic measure without atoms".into()))
            }
            _ => {}
        }
        let total: f64 = list.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > mass_tol {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for a in &mut list {
            a.weight /= total;
        }

        list.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(list.len());
        for a in list {
            match merged.last_mut() {
                Some(last) if (a.location - last.location).abs() <= ATOM_MERGE_TOL => {
                    last.weight += a.weight
                }
                _ => merged.push(a),
            }
        }
        // angles just above −π and at π are neighbours on the circle
        if kind == MeasureKind::CircleAtomic && merged.len() > 1 {
            let first = merged[0];
            let last = merged[merged.len() - 1];
            if circle_distance(first.location, last.location) <= ATOM_MERGE_TOL {
                merged.pop();
                merged[0] = Atom {
                    location: last.location,
                    weight: first.weight + last.weight,
                };
                merged.rotate_left(1);
            }
        }
        merged.retain(|a| a.weight > 0.0);
        Ok(SpectralMeasure {
            kind,
            atoms: merged,
        })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_haar(&self) -> bool {
        self.kind == MeasureKind::Haar
    }

    pub(crate) fn require_real(&self) -> Result<()> {
        if self.kind == MeasureKind::RealAtomic {
            Ok(())
        } else {
            Err(Error::WrongSupport {
                expected: "real-atomic",
            })
        }
    }

    pub(crate) fn require_circle(&self) -> Result<()> {
        if self.kind.on_circle() {
            Ok(())
        } else {
            Err(Error::WrongSupport { expected: "circle" })
        }
    }

    /// Cauchy transform G(z) = Σ w_j / (z − x_j).
    pub fn cauchy_transform(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        self.require_real()?;
        check_finite(z, "z")?;
        let mut g = ComplexPoint::new(0.0, 0.0);
        for a in &self.atoms {
            let d = z - a.location;
            if d.norm() <= POLE_TOL {
                return Err(Error::PoleAtAtom {
                    point: z.to_string(),
                });
            }
            g += a.weight / d;
        }
        Ok(g)
    }

    /// Moment generating function ψ(z) = Σ w_j ξ_j z / (1 − ξ_j z), ξ_j = e^{iθ_j}.
    /// Vanishes identically for the Haar measure.
    pub fn moment_generator(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        self.require_circle()?;
        check_finite(z, "z")?;
        let mut psi = ComplexPoint::new(0.0, 0.0);
        for a in &self.atoms {
            let xz = ComplexPoint::from_polar(1.0, a.location) * z;
            let d = ComplexPoint::new(1.0, 0.0) - xz;
            if d.norm() <= POLE_TOL {
                return Err(Error::PoleAtAtom {
                    point: z.to_string(),
                });
            }
            psi += a.weight * xz / d;
        }
        Ok(psi)
    }

    /// η(z) = ψ(z) / (1 + ψ(z)).
    pub fn eta(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        let psi = self.moment_generator(z)?;
        let den = 1.0 + psi;
        if den.norm() < POLE_TOL {
            return Err(Error::DegenerateDenominator {
                point: z.to_string(),
            });
        }
        Ok(psi / den)
    }

    /// The law of u* when `self` is the law of u: every angle θ ↦ −θ.
    pub fn reflect(&self) -> Result<Self> {
        self.require_circle()?;
        if self.is_haar() {
            return Ok(Self::haar());
        }
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                location: normalize_angle(-a.location),
                weight: a.weight,
            })
            .collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(SpectralMeasure {
            kind: self.kind,
            atoms,
        })
    }

    /// Largest |x_j| over the atoms (0 for Haar).
    pub fn max_abs_location(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.location.abs())
            .fold(0.0, f64::max)
    }

    /// Parses the measure file format. Weights within [`FILE_MASS_TOL`] of
    /// unit mass are renormalized.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(s)?;
        file.into_measure()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }

    pub fn to_file_format(&self) -> MeasureFile {
        let key_theta = self.kind == MeasureKind::CircleAtomic;
        MeasureFile {
            kind: self.kind,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomRecord {
                    x: (!key_theta).then_some(a.location),
                    theta: key_theta.then_some(a.location),
                    w: a.weight,
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file_format()).expect("measure serializes")
    }
}

/// On-disk representation:
/// `{"kind": "real-atomic" | "circle-atomic" | "haar", "atoms": [{"x" | "theta": ..., "w": ...}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub kind: MeasureKind,
    #[serde(default)]
    pub atoms: Vec<AtomRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub w: f64,
}

impl MeasureFile {
    pub fn into_measure(self) -> Result<SpectralMeasure> {
        let mut pairs = Vec::with_capacity(self.atoms.len());
        for rec in &self.atoms {
            let loc = match (self.kind, rec.x, rec.theta) {
                (MeasureKind::RealAtomic, Some(x), None) => x,
                (MeasureKind::CircleAtomic, None, Some(th)) => th,
                (MeasureKind::Haar, _, _) => {
                    return Err(Error::InvalidMeasure(
                        "the haar measure carries no atoms".into(),
                    ))
                }
                (MeasureKind::RealAtomic, _, _) => {
                    return Err(Error::InvalidMeasure(
                        "real-atomic atoms need exactly an \"x\" field".into(),
                    ))
                }
                (MeasureKind::CircleAtomic, _, _) => {
                    return Err(Error::InvalidMeasure(
                        "circle-atomic atoms need exactly a \"theta\" field".into(),
                    ))
                }
            };
            pairs.push((loc, rec.w));
        }
        SpectralMeasure::build(self.kind, pairs, FILE_MASS_TOL)
    }
}
