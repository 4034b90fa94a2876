//! Color representations and the CIEDE2000 difference.
//!
//! Colors are stored as sRGB triples in `[0, 1]`. CIELAB (D65, 2° observer),
//! HCL (the polar form of CIELAB), HSL hue and HSV are computed views.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ColorError;

/// Chroma below which a color counts as achromatic; its hue is then 0.
pub const ACHROMATIC_CHROMA: f64 = 1e-6;

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const XYZ_TO_SRGB: [[f64; 3]; 3] = [
    [3.2404548360214087, -1.5371388501025751, -0.498531546868481],
    [-0.9692663898756538, 1.876010928842491, 0.041556082346673545],
    [0.05564341960421367, -0.20402585426769818, 1.057225162457929],
];

// D65 white as the image of sRGB white, so that neutral grays land exactly on a = b = 0.
const WHITE: [f64; 3] = [
    0.4124564 + 0.3575761 + 0.1804375,
    0.2126729 + 0.7151522 + 0.0721750,
    0.0193339 + 0.1191920 + 0.9503041,
];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

const GAMUT_TOLERANCE: f64 = 1e-9;

/// A color in sRGB with every component in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Color {
    r: f64,
    g: f64,
    b: f64,
}

/// CIELAB coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// Polar CIELAB: hue in degrees `[0, 360)`, chroma, luminance in `[0, 100]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hcl {
    pub h: f64,
    pub c: f64,
    pub l: f64,
}

/// HSV with hue in degrees and saturation/value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// A conversion result that may have been pulled back into the sRGB gamut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mapped {
    pub color: Color,
    pub out_of_gamut: bool,
}

impl Color {
    pub const BLACK: Color = Color { r: 0.0, g: 0.0, b: 0.0 };
    pub const WHITE: Color = Color { r: 1.0, g: 1.0, b: 1.0 };

    /// Builds a color, clamping each component into `[0, 1]`.
    pub fn new(r: f64, g: f64, b: f64) -> Color {
        Color::checked(r, g, b).color
    }

    /// Builds a color and reports whether any component had to be clamped.
    pub fn checked(r: f64, g: f64, b: f64) -> Mapped {
        let fix = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        let color = Color { r: fix(r), g: fix(g), b: fix(b) };
        let out_of_gamut = [r, g, b]
            .iter()
            .any(|v| v.is_nan() || *v < -GAMUT_TOLERANCE || *v > 1.0 + GAMUT_TOLERANCE);
        Mapped { color, out_of_gamut }
    }

    pub fn from_rgb8(r: u8, g: u8, b: u8) -> Color {
        Color { r: r as f64 / 255.0, g: g as f64 / 255.0, b: b as f64 / 255.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn to_rgb8(&self) -> [u8; 3] {
        let q = |v: f64| (v * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }

    /// The nearest color representable as `#rrggbb`.
    pub fn quantized(&self) -> Color {
        let [r, g, b] = self.to_rgb8();
        Color::from_rgb8(r, g, b)
    }

    pub fn from_hex(s: &str) -> Result<Color, ColorError> {
        let digits = s
            .strip_prefix('#')
            .ok_or_else(|| ColorError::InvalidHex(s.to_string()))?;
        if digits.len() != 6 || !digits.is_ascii() {
            return Err(ColorError::InvalidHex(s.to_string()));
        }
        let channel = |i: usize| {
            u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| ColorError::InvalidHex(s.to_string()))
        };
        Ok(Color::from_rgb8(channel(0)?, channel(2)?, channel(4)?))
    }

    pub fn to_hex(&self) -> String {
        let [r, g, b] = self.to_rgb8();
        format!("#{r:02x}{g:02x}{b:02x}")
    }

    pub fn lab(&self) -> Lab {
        srgb_to_lab(self)
    }

    pub fn hcl(&self) -> Hcl {
        srgb_to_hcl(self)
    }

    pub fn is_achromatic(&self) -> bool {
        self.hcl().c < ACHROMATIC_CHROMA
    }

    /// Hue of the HSL/HSV model in degrees; 0 for grays.
    pub fn hsl_hue(&self) -> f64 {
        self.hsv().h
    }

    pub fn hsv(&self) -> Hsv {
        let max = self.r.max(self.g).max(self.b);
        let min = self.r.min(self.g).min(self.b);
        let delta = max - min;
        let h = if delta <= 0.0 {
            0.0
        } else if max == self.r {
            60.0 * ((self.g - self.b) / delta).rem_euclid(6.0)
        } else if max == self.g {
            60.0 * ((self.b - self.r) / delta + 2.0)
        } else {
            60.0 * ((self.r - self.g) / delta + 4.0)
        };
        let s = if max <= 0.0 { 0.0 } else { delta / max };
        Hsv { h: normalize_hue(h), s, v: max }
    }

    pub fn from_hsv(hsv: Hsv) -> Color {
        let h = normalize_hue(hsv.h) / 60.0;
        let s = hsv.s.clamp(0.0, 1.0);
        let v = hsv.v.clamp(0.0, 1.0);
        let c = v * s;
        let x = c * (1.0 - (h.rem_euclid(2.0) - 1.0).abs());
        let (r, g, b) = match h as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = v - c;
        Color::new(r + m, g + m, b + m)
    }

    pub fn from_hcl(hcl: Hcl) -> Mapped {
        hcl_to_srgb(hcl.h, hcl.c, hcl.l)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Color {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::from_hex(s)
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Color::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

fn to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn to_gamma(v: f64) -> f64 {
    if v <= 0.0031308 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > LAB_EPSILON {
        t
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

pub fn normalize_hue(h: f64) -> f64 {
    let h = h.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

pub fn srgb_to_lab(c: &Color) -> Lab {
    let xyz = mul(&SRGB_TO_XYZ, [to_linear(c.r), to_linear(c.g), to_linear(c.b)]);
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    Lab { l: 116.0 * fy - 16.0, a: 500.0 * (fx - fy), b: 200.0 * (fy - fz) }
}

/// Linear-light sRGB for a Lab coordinate, without any gamut handling.
fn lab_to_linear(lab: Lab) -> [f64; 3] {
    let fy = (lab.l + 16.0) / 116.0;
    let fx = fy + lab.a / 500.0;
    let fz = fy - lab.b / 200.0;
    let xyz = [lab_f_inv(fx) * WHITE[0], lab_f_inv(fy) * WHITE[1], lab_f_inv(fz) * WHITE[2]];
    mul(&XYZ_TO_SRGB, xyz)
}

fn in_gamut(linear: &[f64; 3]) -> bool {
    linear.iter().all(|v| *v >= -GAMUT_TOLERANCE && *v <= 1.0 + GAMUT_TOLERANCE)
}

fn encode(linear: [f64; 3]) -> Mapped {
    let gamma = |v: f64| to_gamma(v.max(0.0));
    Mapped {
        color: Color::new(gamma(linear[0]), gamma(linear[1]), gamma(linear[2])),
        out_of_gamut: !in_gamut(&linear),
    }
}

/// Lab to sRGB with componentwise clamping.
pub fn lab_to_srgb(lab: Lab) -> Mapped {
    encode(lab_to_linear(lab))
}

pub fn srgb_to_hcl(c: &Color) -> Hcl {
    let lab = srgb_to_lab(c);
    let chroma = lab.a.hypot(lab.b);
    let h = if chroma < ACHROMATIC_CHROMA { 0.0 } else { normalize_hue(lab.b.atan2(lab.a).to_degrees()) };
    Hcl { h, c: chroma, l: lab.l }
}

fn hcl_lab(h: f64, c: f64, l: f64) -> Lab {
    let rad = h.to_radians();
    Lab { l, a: c * rad.cos(), b: c * rad.sin() }
}

/// HCL to sRGB. Requests outside the sRGB gamut keep hue and luminance and
/// have their chroma reduced to the gamut boundary.
pub fn hcl_to_srgb(h: f64, c: f64, l: f64) -> Mapped {
    let l = l.clamp(0.0, 100.0);
    let c = c.max(0.0);
    let linear = lab_to_linear(hcl_lab(h, c, l));
    if in_gamut(&linear) {
        return encode(linear);
    }
    let (mut lo, mut hi) = (0.0, c);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if in_gamut(&lab_to_linear(hcl_lab(h, mid, l))) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mapped = encode(lab_to_linear(hcl_lab(h, lo, l)));
    Mapped { color: mapped.color, out_of_gamut: true }
}

/// Shortest angular distance between two hues, in `[0, 180]`.
pub fn circular_hue_distance(h1: f64, h2: f64) -> f64 {
    let d = (normalize_hue(h1) - normalize_hue(h2)).abs();
    d.min(360.0 - d)
}

pub fn ciede2000(a: &Color, b: &Color) -> f64 {
    ciede2000_lab(&a.lab(), &b.lab())
}

/// CIEDE2000 with kL = kC = kH = 1.
pub fn ciede2000_lab(x: &Lab, y: &Lab) -> f64 {
    const POW25_7: f64 = 6_103_515_625.0;

    let c1 = x.a.hypot(x.b);
    let c2 = y.a.hypot(y.b);
    let c_bar7 = ((c1 + c2) / 2.0).powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());

    let a1 = (1.0 + g) * x.a;
    let a2 = (1.0 + g) * y.a;
    let c1p = a1.hypot(x.b);
    let c2p = a2.hypot(y.b);
    let hue = |b: f64, a: f64| {
        if b == 0.0 && a == 0.0 {
            0.0
        } else {
            b.atan2(a).to_degrees().rem_euclid(360.0)
        }
    };
    let h1p = hue(x.b, a1);
    let h2p = hue(y.b, a2);

    let dl = y.l - x.l;
    let dc = c2p - c1p;
    let chroma_product = c1p * c2p;
    let dh = if chroma_product == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh_big = 2.0 * chroma_product.sqrt() * (dh.to_radians() / 2.0).sin();

    let l_bar = (x.l + y.l) / 2.0;
    let c_bar_p = (c1p + c2p) / 2.0;
    let h_bar_p = if chroma_product == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= 180.0 {
        (h1p + h2p) / 2.0
    } else if h1p + h2p < 360.0 {
        (h1p + h2p + 360.0) / 2.0
    } else {
        (h1p + h2p - 360.0) / 2.0
    };

    let t = 1.0 - 0.17 * (h_bar_p - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_bar_p).to_radians().cos()
        + 0.32 * (3.0 * h_bar_p + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_bar_p - 63.0).to_radians().cos();
    let d_theta = 30.0 * (-((h_bar_p - 275.0) / 25.0).powi(2)).exp();
    let c_bar_p7 = c_bar_p.powi(7);
    let r_c = 2.0 * (c_bar_p7 / (c_bar_p7 + POW25_7)).sqrt();
    let l50 = (l_bar - 50.0).powi(2);
    let s_l = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let s_c = 1.0 + 0.045 * c_bar_p;
    let s_h = 1.0 + 0.015 * c_bar_p * t;
    let r_t = -(2.0 * d_theta).to_radians().sin() * r_c;

    let tl = dl / s_l;
    let tc = dc / s_c;
    let th = dh_big / s_h;
    (tl * tl + tc * tc + th * th + r_t * tc * th).max(0.0).sqrt()
}
