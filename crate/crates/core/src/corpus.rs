//! Named fixture loops and seeded random loops on the three quadric types.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::census::census;
use crate::curve::QuadricLoop;
use crate::error::Result;
use crate::morse::{require_space_like, QuadricCase};
use crate::pair::{find_critical_points_with, SolverSettings};
use crate::quadric::Quadric;
use crate::trig::{TrigLoop, TrigSeries};

pub mod fixtures {
    use super::*;
    use crate::curve::LoopMode;

    fn loop3(x: TrigSeries, y: TrigSeries, z: TrigSeries) -> TrigLoop {
        TrigLoop::new(vec![x, y, z]).expect("finite fixture coefficients")
    }

    /// The equator `z = 0` of the unit sphere.
    pub fn great_circle() -> QuadricLoop {
        QuadricLoop::new(TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0), Quadric::sphere(), LoopMode::Exact)
            .expect("equator lies on the sphere")
    }

    /// The latitude circle at height `z0` on the unit sphere.
    pub fn latitude(z0: f64) -> QuadricLoop {
        let r = (1.0 - z0 * z0).sqrt();
        QuadricLoop::new(TrigLoop::circle(&[0.0, 0.0, z0], r), Quadric::sphere(), LoopMode::Exact)
            .expect("latitude lies on the sphere")
    }

    /// `(cos t, sin t, 1.2 + 0.1 sin 3t)`.
    pub fn perturbed_latitude_raw() -> TrigLoop {
        loop3(
            TrigSeries::new(0.0, vec![1.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(1.2, vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.1]),
        )
    }

    pub fn sphere_perturbed_latitude() -> QuadricLoop {
        QuadricLoop::normalized(perturbed_latitude_raw(), Quadric::sphere()).expect("normalizable")
    }

    /// The perturbed latitude on the upper sheet of `z^2 - x^2 - y^2 = 1`.
    pub fn upper_sheet_perturbed_latitude() -> QuadricLoop {
        QuadricLoop::normalized(perturbed_latitude_raw(), Quadric::two_sheeted()).expect("normalizable")
    }

    /// `(sin 2t, sin t, 2 + cos t)` on the sphere; one double point at
    /// `(0, pi)`.
    pub fn sphere_figure_eight() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(2.0, vec![1.0], vec![0.0]),
        );
        QuadricLoop::normalized(raw, Quadric::sphere()).expect("normalizable")
    }

    /// `(0.5 sin 2t, 0.5 sin t, 1 + 0.2 cos t)` on the upper sheet; one
    /// double point at `(0, pi)`.
    pub fn upper_sheet_figure_eight() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.0, 0.5]),
            TrigSeries::new(0.0, vec![0.0], vec![0.5]),
            TrigSeries::new(1.0, vec![0.2], vec![0.0]),
        );
        QuadricLoop::normalized(raw, Quadric::two_sheeted()).expect("normalizable")
    }

    /// `(cos t, sin t, 0.3 + 0.1 sin 2t)` on `x^2 + y^2 - z^2 = 1`: a
    /// space-like loop winding once around the waist.
    pub fn one_sheeted_raised_equator() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![1.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(0.3, vec![0.0, 0.0], vec![0.0, 0.1]),
        );
        QuadricLoop::normalized(raw, Quadric::one_sheeted()).expect("normalizable")
    }

    /// `(cos t, sin t, 0.2 cos t + 0.3 sin 2t)` on the sphere; antipodal
    /// points at `(0, pi)` and `(pi/2, 3pi/2)`.
    pub fn sphere_antipodal_crossings() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![1.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(0.0, vec![0.2, 0.0], vec![0.0, 0.3]),
        );
        QuadricLoop::normalized(raw, Quadric::sphere()).expect("normalizable")
    }

    /// `(cos 2t, sin 2t, 0.3 sin t)` on `x^2 + y^2 - z^2 = 1`: winds twice
    /// around the waist, with a double point at `(0, pi)` and two antipodal
    /// points.
    pub fn one_sheeted_double_winding() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![0.0, 1.0], vec![0.0, 0.0]),
            TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]),
            TrigSeries::new(0.0, vec![0.0], vec![0.3]),
        );
        QuadricLoop::normalized(raw, Quadric::one_sheeted()).expect("normalizable")
    }

    /// `(cos t, sin t, 0.1 sin t + 0.05 cos 2t)` on `x^2 + y^2 - z^2 = 1`;
    /// antipodal points at `(pi/4, 5pi/4)` and `(3pi/4, 7pi/4)`.
    pub fn one_sheeted_antipodal_crossings() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![1.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(0.0, vec![0.0, 0.05], vec![0.1, 0.0]),
        );
        QuadricLoop::normalized(raw, Quadric::one_sheeted()).expect("normalizable")
    }

    /// A loop whose raw curve has `g'(0) = 0`.
    pub fn sphere_cusp() -> QuadricLoop {
        let raw = loop3(
            TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.2, -0.1]),
            TrigSeries::new(0.0, vec![-0.2, 0.05], vec![0.0, 0.0]),
            TrigSeries::constant(1.0),
        );
        QuadricLoop::normalized(raw, Quadric::sphere()).expect("normalizable")
    }
}

/// Parameters of the random loop generator for one quadric type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomFamily {
    pub case: QuadricCase,
    pub base: TrigLoop,
    pub degree: usize,
    pub amplitude: f64,
}

impl RandomFamily {
    pub fn for_case(case: QuadricCase) -> Self {
        let (base, amplitude) = match case {
            QuadricCase::Sphere => (TrigLoop::circle(&[0.0, 0.0, 0.6], 0.8), 0.3),
            QuadricCase::TwoSheeted => (TrigLoop::circle(&[0.0, 0.0, 1.5], 1.0), 0.3),
            QuadricCase::OneSheeted => (TrigLoop::circle(&[0.0, 0.0, 0.3], 1.0), 0.15),
        };
        Self { case, base, degree: 8, amplitude }
    }

    pub fn quadric(&self) -> Quadric {
        match self.case {
            QuadricCase::Sphere => Quadric::sphere(),
            QuadricCase::TwoSheeted => Quadric::two_sheeted(),
            QuadricCase::OneSheeted => Quadric::one_sheeted(),
        }
    }

    /// Draws candidate loops until `count` of them pass the acceptance
    /// check. The result depends only on `seed`.
    pub fn generic_loops(&self, count: usize, seed: u64) -> Vec<QuadricLoop> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            assert!(attempts < 100 * (count + 1), "random family rejects almost every loop");
            let raw = TrigLoop::random_perturbation(&self.base, self.degree, self.amplitude, &mut rng);
            if let Ok(l) = self.accept(raw) {
                out.push(l);
            }
        }
        out
    }

    /// Accepts loops that are generic immersions. On the one-sheeted
    /// hyperboloid the loop must also be space-like with no antipodal points.
    fn accept(&self, raw: TrigLoop) -> Result<QuadricLoop> {
        let l = QuadricLoop::normalized(raw, self.quadric())?;
        l.check_immersion()?;
        if self.case == QuadricCase::OneSheeted {
            require_space_like(&l)?;
        }
        let settings = SolverSettings::default();
        let c = census(&l, settings.census_grid);
        if !c.is_generic() || (self.case == QuadricCase::OneSheeted && c.b > 0) {
            return Err(crate::Error::InvalidInput("non-generic census".into()));
        }
        let set = find_critical_points_with(&l, &c, &settings)?;
        if set.non_generic {
            return Err(crate::Error::InvalidInput("degenerate critical points".into()));
        }
        Ok(l)
    }
}


/// Loops on ruled developable surfaces, given in surface coordinates
/// `(u, v)`: `u` selects the ruling and `v` is arc length along it.
pub mod developable {
    use nalgebra::Vector3;

    use crate::developable::{Cone, Cylinder, DevelopableSurface, DriftCurve, TangentDevelopable, Window};
    use crate::trig::{TrigLoop, TrigSeries};

    #[derive(Debug, Clone, PartialEq)]
    pub struct DevelopableFixture {
        pub name: &'static str,
        pub surface: DevelopableSurface,
        pub coords: TrigLoop,
    }

    fn series(c0: f64, a: &[f64], b: &[f64]) -> TrigSeries {
        TrigSeries::new(c0, a.to_vec(), b.to_vec())
    }

    fn coords(u: TrigSeries, v: TrigSeries) -> TrigLoop {
        TrigLoop::new(vec![u, v]).expect("finite fixture coefficients")
    }

    fn curve(coords: Vec<TrigSeries>, drift: Vec<f64>) -> DriftCurve {
        DriftCurve::new(drift, TrigLoop::new(coords).expect("finite")).expect("matching drift")
    }

    fn window(u: [f64; 2], v: [f64; 2]) -> Window {
        Window::new(u, v).expect("valid fixture window")
    }

    fn fixture(name: &'static str, surface: crate::Result<DevelopableSurface>, coords: TrigLoop) -> DevelopableFixture {
        DevelopableFixture { name, surface: surface.expect("valid fixture surface"), coords }
    }

    pub fn cylinders() -> Vec<DevelopableFixture> {
        let round = || curve(vec![series(0.0, &[1.0], &[0.0]), series(0.0, &[0.0], &[1.0])], vec![0.0, 0.0]);
        vec![
            fixture(
                "cylinder-round-ellipse",
                Cylinder::new(Vector3::zeros(), Vector3::z(), round(), window([0.0, 6.0], [-2.0, 2.0])).map(DevelopableSurface::Cylinder),
                coords(series(3.0, &[1.2, 0.2], &[0.0, 0.0]), series(0.0, &[0.0, 0.1], &[0.8, 0.1])),
            ),
            fixture(
                "cylinder-elliptic-tilted",
                Cylinder::new(
                    Vector3::new(0.5, -0.2, 0.0),
                    Vector3::new(0.0, 0.3, 1.0),
                    curve(vec![series(0.0, &[2.0], &[0.0]), series(0.0, &[0.0], &[1.0])], vec![0.0, 0.0]),
                    window([0.5, 5.5], [-2.0, 2.0]),
                )
                .map(DevelopableSurface::Cylinder),
                coords(series(2.5, &[1.0, 0.0, 0.05], &[0.2, 0.0, 0.0]), series(0.3, &[0.3, 0.0], &[0.9, 0.15])),
            ),
            fixture(
                "cylinder-wavy-sheet",
                Cylinder::new(
                    Vector3::zeros(),
                    Vector3::y(),
                    curve(vec![series(0.0, &[], &[]), series(0.0, &[0.4], &[0.2])], vec![1.0, 0.0]),
                    window([-3.0, 3.0], [-2.0, 2.0]),
                )
                .map(DevelopableSurface::Cylinder),
                coords(series(0.2, &[1.5, 0.0], &[0.3, 0.1]), series(-0.1, &[0.1, 0.15], &[1.0, 0.0])),
            ),
            fixture(
                "cylinder-dented-loop",
                Cylinder::new(Vector3::zeros(), Vector3::z(), round(), window([0.0, 6.2], [-2.0, 2.0])).map(DevelopableSurface::Cylinder),
                coords(series(3.0, &[0.9 * 0.6f64.cos(), 0.72 * 0.6f64.cos()], &[-0.9 * 0.6f64.sin(), 0.0]), {
                    series(0.0, &[0.9 * 0.6f64.sin(), 0.72 * 0.6f64.sin()], &[0.9 * 0.6f64.cos(), 0.0])
                }),
            ),
        ]
    }

    pub fn cones() -> Vec<DevelopableFixture> {
        vec![
            fixture(
                "cone-right-circular",
                Cone::new(
                    Vector3::zeros(),
                    curve(vec![series(0.0, &[1.0], &[0.0]), series(0.0, &[0.0], &[1.0]), series(1.0, &[0.0], &[0.0])], vec![0.0; 3]),
                    window([0.0, 6.2], [0.5, 4.0]),
                )
                .map(DevelopableSurface::Cone),
                coords(series(2.5, &[0.8, 0.0], &[0.0, 0.1]), series(2.0, &[0.1, 0.1], &[0.6, 0.0])),
            ),
            fixture(
                "cone-elliptic",
                Cone::new(
                    Vector3::new(0.0, 0.0, -0.5),
                    curve(vec![series(0.0, &[2.0], &[0.0]), series(0.0, &[0.0], &[1.0]), series(1.0, &[0.0], &[0.0])], vec![0.0; 3]),
                    window([0.3, 5.8], [0.4, 5.0]),
                )
                .map(DevelopableSurface::Cone),
                coords(series(3.0, &[1.1, 0.1], &[0.3, 0.0]), series(2.2, &[0.2, 0.0], &[0.9, 0.1])),
            ),
            fixture(
                "cone-oblique",
                Cone::new(
                    Vector3::new(0.3, 0.1, 0.0),
                    curve(vec![series(0.5, &[1.0], &[0.0]), series(0.0, &[0.0], &[1.2]), series(1.5, &[0.2], &[0.0])], vec![0.0; 3]),
                    window([0.2, 6.0], [0.5, 5.0]),
                )
                .map(DevelopableSurface::Cone),
                coords(series(3.0, &[1.0, 0.6], &[0.0, 0.0]), series(2.5, &[0.0, 0.0], &[0.9, 0.5])),
            ),
        ]
    }

    pub fn tangent_developables() -> Vec<DevelopableFixture> {
        let helix = |r: f64, pitch: f64| curve(vec![series(0.0, &[r], &[0.0]), series(0.0, &[0.0], &[r]), series(0.0, &[], &[])], vec![0.0, 0.0, pitch]);
        vec![
            fixture(
                "tangent-helix",
                TangentDevelopable::new(helix(1.0, 0.5), window([0.0, 4.0], [0.2, 3.0])).map(DevelopableSurface::TangentDevelopable),
                coords(series(2.0, &[0.7, 0.0], &[0.0, 0.05]), series(1.3, &[0.1, 0.0], &[0.6, 0.05])),
            ),
            fixture(
                "tangent-steep-helix",
                TangentDevelopable::new(helix(0.8, 1.5), window([0.0, 5.0], [0.3, 3.5])).map(DevelopableSurface::TangentDevelopable),
                coords(series(2.5, &[1.2, 0.1], &[0.2, 0.0]), series(1.6, &[0.0, 0.1], &[0.9, 0.0])),
            ),
            fixture(
                "tangent-wobbly-edge",
                TangentDevelopable::new(
                    curve(
                        vec![series(0.0, &[1.0, 0.2], &[0.0, 0.0]), series(0.0, &[0.0], &[1.0]), series(0.0, &[0.0, 0.0], &[0.0, 0.1])],
                        vec![0.0, 0.0, 0.4],
                    ),
                    window([0.0, 4.5], [0.2, 3.0]),
                )
                .map(DevelopableSurface::TangentDevelopable),
                coords(series(2.2, &[1.0, 0.3], &[0.0, 0.0]), series(1.4, &[0.0, 0.0], &[0.7, 0.3])),
            ),
        ]
    }

    /// Four cylinders, three cones and three tangent developables.
    pub fn all() -> Vec<DevelopableFixture> {
        let mut v = cylinders();
        v.extend(cones());
        v.extend(tangent_developables());
        v
    }
}
