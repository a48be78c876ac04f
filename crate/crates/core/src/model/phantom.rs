use ndarray::Array2;

use crate::RealImage;

/// Tissue classes painted into the procedural head phantom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Tissue {
    Background = 0,
    Bone = 1,
    GreyMatter = 2,
    WhiteMatter = 3,
    Csf = 4,
}

impl Tissue {
    pub fn intensity(self) -> f64 {
        match self {
            Tissue::Background => 0.0,
            Tissue::Bone => 0.3,
            Tissue::GreyMatter => 0.65,
            Tissue::WhiteMatter => 0.45,
            Tissue::Csf => 1.0,
        }
    }
}

/// Piecewise-constant head phantom with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: RealImage,
    pub labels: Array2<Tissue>,
}

struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    tilt_deg: f64,
    tissue: Tissue,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.tilt_deg.to_radians().sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }
}

// Painted in order; later ellipses overwrite earlier ones.
const fn e(cx: f64, cy: f64, a: f64, b: f64, tilt_deg: f64, tissue: Tissue) -> Ellipse {
    Ellipse {
        cx,
        cy,
        a,
        b,
        tilt_deg,
        tissue,
    }
}

const LAYOUT: [Ellipse; 11] = [
    e(0.0, 0.0, 0.72, 0.9, 0.0, Tissue::Bone),
    e(0.0, -0.01, 0.66, 0.84, 0.0, Tissue::Csf),
    e(0.0, -0.01, 0.63, 0.81, 0.0, Tissue::GreyMatter),
    e(0.0, -0.02, 0.52, 0.7, 0.0, Tissue::WhiteMatter),
    e(-0.14, 0.08, 0.07, 0.26, 18.0, Tissue::Csf),
    e(0.14, 0.08, 0.07, 0.26, -18.0, Tissue::Csf),
    e(-0.3, -0.3, 0.1, 0.07, 30.0, Tissue::GreyMatter),
    e(0.3, -0.3, 0.1, 0.07, -30.0, Tissue::GreyMatter),
    e(0.0, -0.45, 0.05, 0.05, 0.0, Tissue::Csf),
    e(0.0, 0.55, 0.12, 0.06, 0.0, Tissue::GreyMatter),
    e(-0.28, 0.38, 0.04, 0.04, 0.0, Tissue::Csf),
];

/// Deterministic multi-ellipse phantom on an `N × N` grid. Index `[i, j]`
/// maps to normalised coordinates `((2i+1)/N − 1, (2j+1)/N − 1)`.
pub fn make_phantom(n: usize) -> Phantom {
    let coord = |k: usize| (2 * k + 1) as f64 / n as f64 - 1.0;
    let labels = Array2::from_shape_fn((n, n), |(i, j)| {
        let (x, y) = (coord(i), coord(j));
        LAYOUT
            .iter()
            .rev()
            .find(|el| el.contains(x, y))
            .map_or(Tissue::Background, |el| el.tissue)
    });
    let image = labels.mapv(Tissue::intensity);
    Phantom { image, labels }
}
