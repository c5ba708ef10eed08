//! Synthetic stimuli with analytic ground truth.
//!
//! A [`PhantomSpec`] is a fully resolved list of elements; [`PhantomSpec::for_category`]
//! draws one from a seed. Every parameter is drawn in the same order for all
//! categories, so a challenging variant X1 and its base X built from the same
//! seed differ only in the parameters their challenges replace.

pub mod element;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::eval::wrap_line;
use crate::liftspace::image::{Image2D, SegmentationMask};
use crate::liftspace::netpbm::{self, Pnm};
use crate::liftspace::wavelet::bin_theta;
use crate::liftspace::{l5d, LiftedFeatureMap, LiftedPoint};
pub use element::{render_element, sine_curvature, sine_peak_curvature, CurveSample, Dash, Element, Hit, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    A,
    B,
    C,
    D,
    E,
    A1,
    B1,
    C1,
    D1,
    E1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Challenge {
    /// Crossing angles drop from 60–90° to 25–35°.
    SmallAngle,
    /// Every element is dashed.
    Dashed,
    /// Sine crests reach |κ| of 0.08–0.12 and branches turn 70–90°.
    HighCurvature,
    /// The second crossing curve becomes an Euler spiral.
    EulerSpiral,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::A,
        Category::B,
        Category::C,
        Category::D,
        Category::E,
        Category::A1,
        Category::B1,
        Category::C1,
        Category::D1,
        Category::E1,
    ];

    pub fn is_challenging(self) -> bool {
        !self.challenges().is_empty()
    }

    /// The simple category a challenging one derives from.
    pub fn base(self) -> Category {
        match self {
            Category::A1 => Category::A,
            Category::B1 => Category::B,
            Category::C1 => Category::C,
            Category::D1 => Category::D,
            Category::E1 => Category::E,
            c => c,
        }
    }

    pub fn challenges(self) -> &'static [Challenge] {
        match self {
            Category::A1 => &[Challenge::SmallAngle, Challenge::EulerSpiral],
            Category::B1 => &[Challenge::Dashed],
            Category::C1 => &[Challenge::HighCurvature],
            Category::D1 => &[Challenge::SmallAngle, Challenge::Dashed],
            Category::E1 => &[Challenge::HighCurvature],
            _ => &[],
        }
    }

    pub fn describe(self) -> &'static str {
        match self.base() {
            Category::A => "crossing",
            Category::B => "bifurcation",
            Category::C => "close parallels",
            Category::D => "bifurcation and crossing",
            _ => "multiple nearby bifurcations",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("category", format!("unknown category {s:?}; expected one of A..E, A1..E1")))
    }
}

/// Parameter ranges the category layouts draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ranges {
    /// Sine amplitude, px.
    pub amplitude: (f64, f64),
    /// Sine spatial frequency ω, rad/px.
    pub frequency: (f64, f64),
    /// Crest curvature ceiling for simple categories.
    pub simple_peak_curvature: f64,
    /// Crest curvature range under [`Challenge::HighCurvature`].
    pub high_peak_curvature: (f64, f64),
    pub stroke_width: f64,
    pub dash: Dash,
}

impl Default for Ranges {
    fn default() -> Self {
        Ranges {
            amplitude: (10.0, 40.0),
            frequency: (2.0 * PI / 200.0, 2.0 * PI / 60.0),
            simple_peak_curvature: 0.02,
            high_peak_curvature: (0.08, 0.12),
            stroke_width: 3.0,
            dash: Dash::default(),
        }
    }
}

pub const CANVAS: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    /// `None` for hand-built layouts such as the three circles.
    pub category: Option<Category>,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub stroke_width: f64,
    pub elements: Vec<Element>,
}

/// Every random quantity a layout may use, drawn in one fixed order.
struct Draws {
    rotation: f64,
    /// Per main vessel: amplitude fraction, phase, crest curvature fraction
    /// and high crest curvature fraction.
    waves: [(f64, f64, f64, f64); 3],
    wide_angle: f64,
    small_angle: f64,
    side: f64,
    branch_turn: f64,
    high_branch_turn: f64,
    spiral_end_kappa: f64,
    gap: f64,
}

impl Draws {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rotation = rng.random_range(0.0..PI);
        let waves = std::array::from_fn(|_| {
            (
                rng.random_range(0.0..=1.0),
                rng.random_range(-PI..PI),
                rng.random_range(0.5..=1.0),
                rng.random_range(0.0..=1.0),
            )
        });
        Draws {
            rotation,
            waves,
            wide_angle: rng.random_range(60f64..=90.0).to_radians(),
            small_angle: rng.random_range(25f64..=35.0).to_radians(),
            side: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            branch_turn: rng.random_range(35f64..=50.0).to_radians(),
            high_branch_turn: rng.random_range(70f64..=90.0).to_radians(),
            spiral_end_kappa: rng.random_range(0.03..=0.05),
            gap: rng.random_range(10.0..=13.0),
        }
    }
}

/// Axis length of main vessels and arclength of branches.
const VESSEL_LENGTH: f64 = 180.0;
const BRANCH_LENGTH: f64 = 70.0;

struct Layout<'a> {
    ranges: &'a Ranges,
    draws: Draws,
    high: bool,
    center: (f64, f64),
}

impl Layout<'_> {
    fn normal(&self) -> (f64, f64) {
        (-self.draws.rotation.sin(), self.draws.rotation.cos())
    }

    fn offset(&self, d: f64) -> (f64, f64) {
        let n = self.normal();
        (self.center.0 + d * n.0, self.center.1 + d * n.1)
    }

    /// Frequency giving the wave `i` its crest curvature, clamped to the range.
    fn frequency(&self, amplitude: f64, i: usize) -> f64 {
        let (lo, hi) = self.ranges.frequency;
        let (_, _, frac, high) = self.draws.waves[i];
        let peak = if self.high {
            let (a, b) = self.ranges.high_peak_curvature;
            a + high * (b - a)
        } else {
            frac * self.ranges.simple_peak_curvature
        };
        (peak / amplitude).sqrt().clamp(lo, hi)
    }

    fn wave(&self, i: usize, center: (f64, f64), rotation: f64, amplitude: f64) -> Shape {
        let phase = self.draws.waves[i].1;
        Shape::Sine {
            center,
            rotation,
            amplitude,
            frequency: self.frequency(amplitude, i),
            phase,
            length: VESSEL_LENGTH,
        }
    }

    /// Main vessels take amplitudes from the lower half of the range.
    fn main_wave(&self, i: usize, center: (f64, f64), rotation: f64) -> Shape {
        let (lo, hi) = self.ranges.amplitude;
        self.wave(i, center, rotation, lo + self.draws.waves[i].0 * (0.5 * (lo + hi) - lo))
    }

    /// Secondary vessels use the smallest amplitude.
    fn minor_wave(&self, i: usize, center: (f64, f64), rotation: f64) -> Shape {
        self.wave(i, center, rotation, self.ranges.amplitude.0)
    }

    /// Branch leaving `parent` at axis coordinate `t`, tangent and co-curved
    /// with it, turning towards `side` (±1 along the parent normal).
    fn branch(&self, parent: &Shape, t: f64, forward: bool, side: f64) -> Shape {
        let Shape::Sine { center, rotation, amplitude, frequency, phase, .. } = *parent else {
            unreachable!("branches grow from sine vessels")
        };
        let (rs, rc) = rotation.sin_cos();
        let y = amplitude * (frequency * t + phase).sin();
        let start = (center.0 + rc * t - rs * y, center.1 + rs * t + rc * y);
        let mut heading = rotation + (amplitude * frequency * (frequency * t + phase).cos()).atan();
        let mut kappa0 = sine_curvature(amplitude, frequency, phase, t);
        // Turning towards +normal is positive κ when heading along the axis.
        let mut turn_sign = side;
        if !forward {
            heading += PI;
            kappa0 = -kappa0;
            turn_sign = -side;
        }
        let turn = if self.high { self.draws.high_branch_turn } else { self.draws.branch_turn };
        Shape::EulerSpiral {
            start,
            heading,
            kappa0,
            slope: turn_sign * 2.0 * turn / (BRANCH_LENGTH * BRANCH_LENGTH),
            length: BRANCH_LENGTH,
        }
    }
}

/// Euler spiral of length `length` whose midpoint sits at `mid` with heading
/// `heading` and zero curvature.
pub fn centred_spiral(mid: (f64, f64), heading: f64, slope: f64, length: f64) -> Shape {
    // The half before the midpoint, walked backwards, is a spiral from `mid`
    // with heading + π, κ₀ = 0 and the same slope.
    let back = Shape::EulerSpiral { start: mid, heading: heading + PI, kappa0: 0.0, slope, length: length / 2.0 };
    let end = *back.samples(element::SAMPLE_STEP).last().expect("nonempty");
    Shape::EulerSpiral {
        start: (end.x, end.y),
        heading: heading + slope * length * length / 8.0,
        kappa0: -slope * length / 2.0,
        slope,
        length,
    }
}

impl PhantomSpec {
    /// Draws the layout of `category` from `seed` with the default ranges.
    pub fn for_category(category: Category, seed: u64) -> Self {
        Self::for_category_with(category, seed, &Ranges::default())
    }

    pub fn for_category_with(category: Category, seed: u64, ranges: &Ranges) -> Self {
        let challenges = category.challenges();
        let has = |c: Challenge| challenges.contains(&c);
        let layout = Layout {
            ranges,
            draws: Draws::new(seed),
            high: has(Challenge::HighCurvature),
            center: ((CANVAS / 2) as f64, (CANVAS / 2) as f64),
        };
        let d = &layout.draws;
        let rot = d.rotation;
        let crossing = if has(Challenge::SmallAngle) { d.small_angle } else { d.wide_angle };
        let mut elements: Vec<Element> = Vec::new();
        let mut push = |shape: Shape, unit: u32| elements.push(Element { shape, unit, dash: None });
        match category.base() {
            Category::A => {
                push(layout.main_wave(0, layout.center, rot), 1);
                if has(Challenge::EulerSpiral) {
                    let slope = d.side * d.spiral_end_kappa / (VESSEL_LENGTH / 2.0);
                    push(centred_spiral(layout.center, rot + crossing, slope, VESSEL_LENGTH), 2);
                } else {
                    push(layout.main_wave(1, layout.center, rot + crossing), 2);
                }
            }
            Category::B => {
                let parent = layout.main_wave(0, layout.offset(-30.0), rot);
                push(parent, 1);
                push(layout.branch(&parent, 0.0, true, -1.0), 1);
                push(layout.minor_wave(1, layout.offset(40.0), rot), 2);
            }
            Category::C => {
                push(layout.main_wave(0, layout.offset(-d.gap / 2.0), rot), 1);
                push(layout.main_wave(0, layout.offset(d.gap / 2.0), rot), 2);
            }
            Category::D => {
                let parent = layout.main_wave(0, layout.center, rot);
                push(parent, 1);
                push(layout.branch(&parent, -35.0, false, d.side), 1);
                let CurveSample { x, y, .. } = point_on_sine(&parent, 35.0);
                push(layout.minor_wave(1, (x, y), rot + crossing), 2);
            }
            _ => {
                let parent = layout.main_wave(0, layout.offset(-25.0), rot);
                push(parent, 1);
                push(layout.branch(&parent, -20.0, false, -1.0), 1);
                push(layout.branch(&parent, 15.0, true, -1.0), 1);
                push(layout.minor_wave(1, layout.offset(45.0), rot), 2);
            }
        }
        if has(Challenge::Dashed) {
            for e in &mut elements {
                e.dash = Some(ranges.dash);
            }
        }
        PhantomSpec {
            category: Some(category),
            seed,
            width: CANVAS,
            height: CANVAS,
            stroke_width: ranges.stroke_width,
            elements,
        }
    }

    /// Three mutually crossing full circles of radii 35, 40 and 45 px.
    pub fn three_circles() -> Self {
        let circle = |cx: f64, cy: f64, r: f64, unit: u32| Element {
            shape: Shape::Circle { center: (cx, cy), radius: r, start: 0.0, sweep: 2.0 * PI },
            unit,
            dash: None,
        };
        PhantomSpec {
            category: None,
            seed: 0,
            width: CANVAS,
            height: CANVAS,
            stroke_width: Ranges::default().stroke_width,
            elements: vec![circle(80.0, 80.0, 35.0, 1), circle(125.0, 85.0, 40.0, 2), circle(100.0, 125.0, 45.0, 3)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.width > u16::MAX as usize || self.height > u16::MAX as usize {
            return Err(Error::param("canvas", format!("{}x{} is not a usable canvas", self.width, self.height)));
        }
        if !(self.stroke_width >= 1.0) {
            return Err(Error::param("stroke_width", format!("must be at least 1 px, got {}", self.stroke_width)));
        }
        if self.elements.is_empty() {
            return Err(Error::param("elements", "a phantom needs at least one element"));
        }
        if self.elements.iter().any(|e| e.unit == 0) {
            return Err(Error::param("unit", "unit ids start at 1; 0 is reserved for noise"));
        }
        self.elements.iter().try_for_each(|e| e.shape.validate())
    }
}

fn point_on_sine(shape: &Shape, t: f64) -> CurveSample {
    let Shape::Sine { center, rotation, amplitude, frequency, phase, .. } = *shape else {
        unreachable!("sine expected")
    };
    let (rs, rc) = rotation.sin_cos();
    let y = amplitude * (frequency * t + phase).sin();
    CurveSample {
        x: center.0 + rc * t - rs * y,
        y: center.1 + rs * t + rc * y,
        theta: rotation + (amplitude * frequency * (frequency * t + phase).cos()).atan(),
        kappa: sine_curvature(amplitude, frequency, phase, t),
        s: 0.0,
    }
}

/// A stroke pixel and the ground truth of every element covering it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokePixel {
    pub x: u16,
    pub y: u16,
    pub hits: Vec<Hit>,
}

impl StrokePixel {
    /// Distinct unit ids, ascending.
    pub fn labels(&self) -> Vec<u32> {
        let mut l: Vec<u32> = self.hits.iter().map(|h| h.unit).collect();
        l.sort_unstable();
        l.dedup();
        l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomCase {
    pub spec: PhantomSpec,
    /// Dark strokes (0) on a bright background (1).
    pub image: Image2D,
    /// Row-major; every pixel has at least one hit.
    pub pixels: Vec<StrokePixel>,
}

pub fn generate(spec: &PhantomSpec) -> Result<PhantomCase> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut per_pixel: BTreeMap<(usize, usize), Vec<Hit>> = BTreeMap::new();
    for (i, e) in spec.elements.iter().enumerate() {
        for (x, y, hit) in render_element(e, i, spec.stroke_width, (w, h))? {
            per_pixel.entry((y, x)).or_default().push(hit);
        }
    }
    let mut image = Image2D::filled(w, h, 1.0);
    let pixels = per_pixel
        .into_iter()
        .map(|((y, x), hits)| {
            image.set(x, y, 0.0);
            StrokePixel { x: x as u16, y: y as u16, hits }
        })
        .collect();
    Ok(PhantomCase { spec: spec.clone(), image, pixels })
}

impl PhantomCase {
    pub fn unit_count(&self) -> usize {
        let mut units: Vec<u32> = self.spec.elements.iter().map(|e| e.unit).collect();
        units.sort_unstable();
        units.dedup();
        units.len()
    }

    /// Lifted ground truth: one point per stroke pixel, like the lift of
    /// an image. Where elements overlap, the nearest centreline sets θ and
    /// κ (ties to the lower element index) and the point carries every
    /// covering unit. Curvature is expressed for travel along the bin
    /// direction, so a hit running the other way contributes −κ.
    pub fn lifted_truth(&self, n_theta: usize, intensity: f64) -> Result<GroundTruth> {
        if n_theta == 0 {
            return Err(Error::param("n_theta", "must be positive"));
        }
        let step = PI / n_theta as f64;
        let mut points = Vec::with_capacity(self.pixels.len());
        let mut labels = Vec::with_capacity(self.pixels.len());
        for px in &self.pixels {
            let hit = px
                .hits
                .iter()
                .min_by(|a, b| a.dist.total_cmp(&b.dist).then(a.element.cmp(&b.element)))
                .expect("stroke pixels have a hit");
            let line = wrap_line(hit.theta);
            let bin = (((line + PI / 2.0) / step).round() as usize % n_theta) as u16;
            let theta = bin_theta(n_theta, bin as usize);
            let kappa = if (hit.theta - theta).cos() >= 0.0 { hit.kappa } else { -hit.kappa };
            points.push(LiftedPoint { x: px.x, y: px.y, theta_bin: bin, theta, f: intensity, kappa });
            labels.push(px.labels());
        }
        let map = LiftedFeatureMap { width: self.spec.width, height: self.spec.height, n_theta, points };
        Ok(GroundTruth { map, labels })
    }

    /// The stroke pixels as a vessel mask.
    pub fn mask(&self) -> SegmentationMask {
        let mut m = SegmentationMask::empty(self.spec.width, self.spec.height);
        for p in &self.pixels {
            m.set(p.x as usize, p.y as usize, true);
        }
        m
    }

    /// Writes `stimulus.pgm`, `mask.pgm`, `truth.l5d`, `truth_labels.json` and `spec.json` into `dir`.
    pub fn save(&self, dir: &Path, n_theta: usize) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        netpbm::write(&dir.join("stimulus.pgm"), &Pnm::from_image(&self.image, 255))?;
        netpbm::write(&dir.join("mask.pgm"), &Pnm::from_mask(&self.mask()))?;
        let truth = self.lifted_truth(n_theta, 1.0)?;
        truth.save(&dir.join("truth.l5d"), &dir.join("truth_labels.json"))?;
        let spec = serde_json::to_vec_pretty(&self.spec)?;
        let path = dir.join("spec.json");
        std::fs::write(&path, spec).map_err(|e| Error::io(&path, e))
    }
}

/// A lifted map with the set of ground-truth units of every point.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub map: LiftedFeatureMap,
    pub labels: Vec<Vec<u32>>,
}

impl GroundTruth {
    pub fn save(&self, map_path: &Path, labels_path: &Path) -> Result<()> {
        l5d::write(map_path, &self.map)?;
        let json = serde_json::to_vec(&self.labels)?;
        std::fs::write(labels_path, json).map_err(|e| Error::io(labels_path, e))
    }

    pub fn load(map_path: &Path, labels_path: &Path) -> Result<Self> {
        let map = l5d::read(map_path)?;
        let bytes = std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
        let labels: Vec<Vec<u32>> = serde_json::from_slice(&bytes)?;
        if labels.len() != map.len() {
            return Err(Error::format(
                "labels",
                format!("{} label sets for {} lifted points", labels.len(), map.len()),
            ));
        }
        Ok(GroundTruth { map, labels })
    }
}
