use crate::geometry::{Vec2, COORD_TOL};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Orientation-part of an [`Isometry`]: an element of the dihedral group of
/// order `2q`, acting as `p ↦ Rot(2π·rotation/q) · Refl^reflect · p`, where
/// `Refl` mirrors across the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orientation {
    pub rotation: u32,
    pub reflect: bool,
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation {
        rotation: 0,
        reflect: false,
    };

    pub fn compose(self, other: Orientation, q: u32) -> Orientation {
        let k2 = if self.reflect {
            (q - other.rotation % q) % q
        } else {
            other.rotation % q
        };
        Orientation {
            rotation: (self.rotation + k2) % q,
            reflect: self.reflect ^ other.reflect,
        }
    }

    /// Row-major 2×2 matrix of the linear map.
    pub fn matrix(self, q: u32) -> [f64; 4] {
        let (s, c) = (TAU * self.rotation as f64 / q as f64).sin_cos();
        if self.reflect {
            [c, s, s, -c]
        } else {
            [c, -s, s, c]
        }
    }
}

/// Plane isometry whose linear part is a multiple of the base angle `2π/q`,
/// optionally preceded by a reflection, followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub orientation: Orientation,
    pub translation: Vec2,
    pub q: u32,
}

impl Isometry {
    pub fn identity(q: u32) -> Self {
        Isometry {
            orientation: Orientation::IDENTITY,
            translation: Vec2::ZERO,
            q,
        }
    }

    pub fn new(rotation: u32, reflect: bool, translation: Vec2, q: u32) -> Self {
        assert!(q > 0, "base angle denominator must be positive");
        Isometry {
            orientation: Orientation {
                rotation: rotation % q,
                reflect,
            },
            translation,
            q,
        }
    }

    pub fn rotation(&self) -> u32 {
        self.orientation.rotation
    }

    pub fn reflect(&self) -> bool {
        self.orientation.reflect
    }

    #[inline]
    pub fn apply_linear(&self, p: Vec2) -> Vec2 {
        let m = self.orientation.matrix(self.q);
        Vec2::new(m[0] * p.x + m[1] * p.y, m[2] * p.x + m[3] * p.y)
    }

    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.apply_linear(p) + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        assert_eq!(self.q, other.q, "isometries over different base angles");
        Isometry {
            orientation: self.orientation.compose(other.orientation, self.q),
            translation: self.apply(other.translation),
            q: self.q,
        }
    }

    /// Finds the isometry mapping `src[k]` onto `dst[k]` for every `k`, if one
    /// with a linear part in the dihedral group of order `2q` exists.
    pub fn fit(src: &[Vec2], dst: &[Vec2], q: u32, tol: f64) -> Option<Isometry> {
        if src.len() != dst.len() || src.is_empty() {
            return None;
        }
        for reflect in [false, true] {
            for rotation in 0..q {
                let lin = Isometry::new(rotation, reflect, Vec2::ZERO, q);
                let t = dst[0] - lin.apply_linear(src[0]);
                let iso = Isometry { translation: t, ..lin };
                if src.iter().zip(dst).all(|(s, d)| iso.apply(*s).dist(*d) <= tol) {
                    return Some(iso);
                }
            }
        }
        None
    }
}

impl Default for Isometry {
    fn default() -> Self {
        Isometry::identity(1)
    }
}

/// Tolerance used when fitting isometries to authored child coordinates.
pub const FIT_TOL: f64 = 1e3 * COORD_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iso_strategy(q: u32) -> impl Strategy<Value = Isometry> {
        (0..q, any::<bool>(), -50.0..50.0f64, -50.0..50.0f64)
            .prop_map(move |(k, r, x, y)| Isometry::new(k, r, Vec2::new(x, y), q))
    }

    proptest! {
        #[test]
        fn composition_matches_sequential_application(
            a in iso_strategy(10), b in iso_strategy(10),
            x in -10.0..10.0f64, y in -10.0..10.0f64,
        ) {
            let p = Vec2::new(x, y);
            let lhs = a.compose(&b).apply(p);
            let rhs = a.apply(b.apply(p));
            prop_assert!(lhs.dist(rhs) < 1e-9);
            if !a.reflect() {
                prop_assert_eq!(a.compose(&b).rotation(), (a.rotation() + b.rotation()) % 10);
            }
        }

        #[test]
        fn distances_are_preserved(
            a in iso_strategy(4),
            x0 in -10.0..10.0f64, y0 in -10.0..10.0f64,
            x1 in -10.0..10.0f64, y1 in -10.0..10.0f64,
        ) {
            let (p, q) = (Vec2::new(x0, y0), Vec2::new(x1, y1));
            let d = p.dist(q);
            let d2 = a.apply(p).dist(a.apply(q));
            prop_assert!((d - d2).abs() <= 1e-12 * d.max(1.0));
        }
    }

    #[test]
    fn fit_recovers_isometry() {
        let src = [Vec2::new(0., 0.), Vec2::new(1., 0.), Vec2::new(0.2, 0.7)];
        let iso = Isometry::new(3, true, Vec2::new(2.5, -1.0), 10);
        let dst: Vec<Vec2> = src.iter().map(|p| iso.apply(*p)).collect();
        let got = Isometry::fit(&src, &dst, 10, 1e-9).unwrap();
        assert_eq!(got.orientation, iso.orientation);
        assert!(got.translation.dist(iso.translation) < 1e-12);
        // 45 degrees is not a multiple of 36
        let rot45: Vec<Vec2> = src.iter().map(|p| p.rotate(std::f64::consts::FRAC_PI_4)).collect();
        assert!(Isometry::fit(&src, &rot45, 10, 1e-9).is_none());
    }
}
