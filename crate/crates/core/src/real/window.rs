use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Beyond this radius `e^{-pi t^2}` is below `1e-57` and is treated as zero.
pub const GAUSSIAN_RADIUS: f64 = 6.5;

/// Largest supported B-spline order; the explicit formula loses accuracy beyond it.
pub const MAX_BSPLINE_ORDER: u32 = 12;

/// An elementary window shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `e^{-pi t^2}`.
    Gaussian,
    /// `1_{[0, gamma)}`.
    Box(f64),
    /// Centered cardinal B-spline of order `n`, supported on `[-n/2, n/2]`.
    BSpline(u32),
}

impl Shape {
    fn tag(&self) -> u8 {
        match self {
            Shape::Gaussian => 0,
            Shape::Box(_) => 1,
            Shape::BSpline(_) => 2,
        }
    }

    fn param_bits(&self) -> u64 {
        match *self {
            Shape::Gaussian => 0,
            Shape::Box(g) => g.to_bits(),
            Shape::BSpline(n) => n as u64,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Shape::Gaussian => {
                if t.abs() > GAUSSIAN_RADIUS {
                    0.0
                } else {
                    (-PI * t * t).exp()
                }
            }
            Shape::Box(g) => {
                if (0.0..g).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::BSpline(n) => bspline(n, t),
        }
    }

    /// Closed interval outside of which the shape vanishes (or is negligible).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Shape::Gaussian => (-GAUSSIAN_RADIUS, GAUSSIAN_RADIUS),
            Shape::Box(g) => (0.0, g),
            Shape::BSpline(n) => (-(n as f64) / 2.0, n as f64 / 2.0),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Shape::Gaussian)
    }

    /// Points where the shape is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Shape::Gaussian => vec![],
            Shape::Box(g) => vec![0.0, g],
            Shape::BSpline(n) => (0..=n).map(|k| k as f64 - n as f64 / 2.0).collect(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match *self {
            Shape::Gaussian => std::f64::consts::FRAC_1_SQRT_2,
            Shape::Box(g) => g,
            Shape::BSpline(n) => bspline(2 * n, 0.0),
        }
    }

    pub fn integral(&self) -> f64 {
        match *self {
            Shape::Gaussian => 1.0,
            Shape::Box(g) => g,
            Shape::BSpline(_) => 1.0,
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            Shape::Gaussian | Shape::Box(_) => 1.0,
            Shape::BSpline(n) => bspline(n, 0.0),
        }
    }

    fn spec(&self) -> String {
        match *self {
            Shape::Gaussian => "gaussian".into(),
            Shape::Box(g) => format!("box:{g}"),
            Shape::BSpline(n) => format!("bspline:{n}"),
        }
    }
}

fn bspline(n: u32, t: f64) -> f64 {
    let half = n as f64 / 2.0;
    if t < -half || t >= half {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for k in 1..n {
        fact *= k as f64;
    }
    for k in 0..=n {
        let u = t + half - k as f64;
        if u >= 0.0 {
            let term = if n == 1 { 1.0 } else { u.powi(n as i32 - 1) };
            acc += if k % 2 == 0 { binom * term } else { -binom * term };
        }
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    (acc / fact).max(0.0)
}

/// `coeff * E_freq T_shift shape`, i.e. `t -> coeff e^{2 pi i freq t} shape(t - shift)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub coeff: Complex64,
    pub shift: f64,
    pub freq: f64,
    pub shape: Shape,
}

impl Atom {
    pub fn plain(shape: Shape) -> Atom {
        Atom {
            coeff: Complex64::new(1.0, 0.0),
            shift: 0.0,
            freq: 0.0,
            shape,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let v = self.shape.eval(t - self.shift);
        if v == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeff * Complex64::from_polar(v, TAU * self.freq * t)
    }

    /// `E_b T_a` applied to the atom: `E_b T_a E_w T_x = e^{-2 pi i w a} E_{b+w} T_{a+x}`.
    pub fn tf_shift(&self, a: f64, b: f64) -> Atom {
        Atom {
            coeff: self.coeff * Complex64::from_polar(1.0, -TAU * self.freq * a),
            shift: self.shift + a,
            freq: self.freq + b,
            shape: self.shape,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.shape.support();
        (lo + self.shift, hi + self.shift)
    }
}

/// A window function on the real line.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    Gaussian,
    Box(f64),
    BSpline(u32),
    /// A finite linear combination of time-frequency shifted shapes.
    Combo(Vec<Atom>),
}

impl Window {
    pub fn new_box(gamma: f64) -> Result<Window> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("box width must be positive, got {gamma}")));
        }
        Ok(Window::Box(gamma))
    }

    pub fn new_bspline(n: u32) -> Result<Window> {
        if n == 0 || n > MAX_BSPLINE_ORDER {
            return Err(Error::InvalidArgument(format!(
                "B-spline order must be in 1..={MAX_BSPLINE_ORDER}, got {n}"
            )));
        }
        Ok(Window::BSpline(n))
    }

    pub fn zero() -> Window {
        Window::Combo(Vec::new())
    }

    /// Parses `gaussian`, `box:GAMMA` or `bspline:N`.
    pub fn parse(s: &str) -> Result<Window> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let bad = || Error::InvalidArgument(format!("cannot parse window '{s}'"));
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("gaussian", None) => Ok(Window::Gaussian),
            ("box", None) => Ok(Window::Box(1.0)),
            ("box", Some(a)) => Window::new_box(a.parse().map_err(|_| bad())?),
            ("bspline", Some(a)) => Window::new_bspline(a.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }

    /// Reads the JSON form written by `Serialize`: a window string or
    /// `{"combo": [{"coeff_re", "coeff_im", "shift", "freq", "shape"}, ...]}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Window> {
        if let Some(s) = v.as_str() {
            return Window::parse(s);
        }
        let bad = |what: &str| Error::InvalidArgument(format!("window JSON: {what}"));
        let atoms = v.get("combo").and_then(|a| a.as_array()).ok_or_else(|| bad("expected a string or a combo list"))?;
        let num = |a: &serde_json::Value, k: &str| a.get(k).and_then(|x| x.as_f64()).ok_or_else(|| bad(&format!("missing number '{k}'")));
        let mut out = Vec::with_capacity(atoms.len());
        for a in atoms {
            let shape = a.get("shape").and_then(|x| x.as_str()).ok_or_else(|| bad("missing 'shape'"))?;
            let shape = match Window::parse(shape)? {
                Window::Gaussian => Shape::Gaussian,
                Window::Box(g) => Shape::Box(g),
                Window::BSpline(n) => Shape::BSpline(n),
                Window::Combo(_) => return Err(bad("nested combo")),
            };
            out.push(Atom {
                coeff: Complex64::new(num(a, "coeff_re")?, num(a, "coeff_im")?),
                shift: num(a, "shift")?,
                freq: num(a, "freq")?,
                shape,
            });
        }
        Ok(Window::Combo(out))
    }

    /// Builds `sum c_j E_{b_j} T_{a_j} w_j`, flattening nested combinations.
    pub fn combo(terms: &[(Complex64, f64, f64, &Window)]) -> Window {
        let mut atoms = Vec::new();
        for (c, a, b, w) in terms {
            for atom in w.atoms() {
                let mut s = atom.tf_shift(*a, *b);
                s.coeff *= c;
                atoms.push(s);
            }
        }
        Window::Combo(atoms)
    }

    pub fn atoms(&self) -> Vec<Atom> {
        match self {
            Window::Gaussian => vec![Atom::plain(Shape::Gaussian)],
            Window::Box(g) => vec![Atom::plain(Shape::Box(*g))],
            Window::BSpline(n) => vec![Atom::plain(Shape::BSpline(*n))],
            Window::Combo(a) => a.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Window::Combo(a) if a.iter().all(|x| x.coeff == Complex64::new(0.0, 0.0)))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Window::Gaussian => Complex64::new(Shape::Gaussian.eval(t), 0.0),
            Window::Box(g) => Complex64::new(Shape::Box(*g).eval(t), 0.0),
            Window::BSpline(n) => Complex64::new(Shape::BSpline(*n).eval(t), 0.0),
            Window::Combo(a) => a.iter().map(|x| x.eval(t)).sum(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Window {
        Window::combo(&[(c, 0.0, 0.0, self)])
    }

    /// `E_b T_a w`.
    pub fn tf_shift(&self, a: f64, b: f64) -> Window {
        Window::combo(&[(Complex64::new(1.0, 0.0), a, b, self)])
    }

    pub fn add(&self, other: &Window) -> Window {
        let one = Complex64::new(1.0, 0.0);
        Window::combo(&[(one, 0.0, 0.0, self), (one, 0.0, 0.0, other)])
    }

    pub fn sub(&self, other: &Window) -> Window {
        Window::combo(&[(Complex64::new(1.0, 0.0), 0.0, 0.0, self), (Complex64::new(-1.0, 0.0), 0.0, 0.0, other)])
    }

    /// Interval outside of which the window vanishes or is negligible.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.atoms()
            .iter()
            .map(Atom::support)
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    pub fn is_compact(&self) -> bool {
        self.atoms().iter().all(|a| a.shape.is_compact())
    }

    /// Sum of `|coeff| * ||shape||_2`, an upper bound for the L2 norm.
    pub fn norm_bound(&self) -> f64 {
        self.atoms().iter().map(|a| a.coeff.norm() * a.shape.norm_sq().sqrt()).sum()
    }

    /// Merges atoms that share shape, shift and frequency, and drops negligible ones.
    pub fn compress(&self, drop_below: f64) -> Window {
        let mut index: HashMap<(u8, u64, u64, u64), usize> = HashMap::new();
        let mut out: Vec<Atom> = Vec::new();
        for a in self.atoms() {
            let key = (a.shape.tag(), a.shape.param_bits(), a.shift.to_bits(), a.freq.to_bits());
            match index.get(&key) {
                Some(&i) => out[i].coeff += a.coeff,
                None => {
                    index.insert(key, out.len());
                    out.push(a);
                }
            }
        }
        out.retain(|a| a.coeff.norm() > drop_below);
        Window::Combo(out)
    }
}

/// A window prepared for repeated evaluation: atoms sharing shape and shift
/// are grouped so the shape is evaluated once per group.
pub struct CompiledWindow {
    groups: Vec<(Shape, f64, f64, f64, Vec<(Complex64, f64)>)>,
}

impl CompiledWindow {
    pub fn new(w: &Window) -> Self {
        let mut groups: Vec<(Shape, f64, f64, f64, Vec<(Complex64, f64)>)> = Vec::new();
        for a in w.atoms() {
            match groups.iter_mut().find(|g| g.0 == a.shape && g.1 == a.shift) {
                Some(g) => g.4.push((a.coeff, a.freq)),
                None => {
                    let (lo, hi) = a.support();
                    groups.push((a.shape, a.shift, lo, hi, vec![(a.coeff, a.freq)]));
                }
            }
        }
        CompiledWindow { groups }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (shape, shift, lo, hi, terms) in &self.groups {
            if t < *lo || t > *hi {
                continue;
            }
            let v = shape.eval(t - shift);
            if v == 0.0 {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (c, f) in terms {
                s += c * Complex64::from_polar(1.0, TAU * f * t);
            }
            acc += s * v;
        }
        acc
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Gaussian => write!(f, "gaussian"),
            Window::Box(g) => write!(f, "box:{g}"),
            Window::BSpline(n) => write!(f, "bspline:{n}"),
            Window::Combo(a) => write!(f, "combo[{} atoms]", a.len()),
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Atom", 5)?;
        st.serialize_field("coeff_im", &self.coeff.im)?;
        st.serialize_field("coeff_re", &self.coeff.re)?;
        st.serialize_field("freq", &self.freq)?;
        st.serialize_field("shape", &self.shape.spec())?;
        st.serialize_field("shift", &self.shift)?;
        st.end()
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Window::Combo(atoms) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("combo", atoms)?;
                m.end()
            }
            other => s.serialize_str(&other.to_string()),
        }
    }
}
