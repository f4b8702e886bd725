#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl Hsv {
    pub const fn new(h: f64, s: f64, v: f64) -> Self {
        Hsv { h, s, v }
    }
}

pub fn rgb_to_hsv(c: Rgb) -> Hsv {
    let r = c.r as f64 / 255.0;
    let g = c.g as f64 / 255.0;
    let b = c.b as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    Hsv {
        h: if h >= 360.0 { h - 360.0 } else { h },
        s,
        v: max,
    }
}

pub fn hsv_to_rgb(c: Hsv) -> Rgb {
    let h = c.h.rem_euclid(360.0) / 60.0;
    let chroma = c.v * c.s;
    let x = chroma * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = c.v - chroma;
    let to_u8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    Rgb::new(to_u8(r), to_u8(g), to_u8(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primaries_and_gray() {
        assert_eq!(rgb_to_hsv(Rgb::new(255, 0, 0)), Hsv::new(0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv(Rgb::new(0, 0, 255)), Hsv::new(240.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv(Rgb::new(0, 255, 0)), Hsv::new(120.0, 1.0, 1.0));
        let gray = rgb_to_hsv(Rgb::new(128, 128, 128));
        assert_eq!((gray.h, gray.s), (0.0, 0.0));
        assert!((gray.v - 0.502).abs() < 1e-3);
        assert_eq!(rgb_to_hsv(Rgb::new(0, 0, 0)), Hsv::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn magenta_side_hue() {
        let h = rgb_to_hsv(Rgb::new(255, 0, 128)).h;
        assert!(h > 329.0 && h < 331.0, "{h}");
    }

    #[test]
    fn exhaustive_roundtrip_on_a_lattice() {
        for r in (0..=255).step_by(15) {
            for g in (0..=255).step_by(15) {
                for b in (0..=255).step_by(15) {
                    let c = Rgb::new(r as u8, g as u8, b as u8);
                    let hsv = rgb_to_hsv(c);
                    assert!(hsv.h >= 0.0 && hsv.h < 360.0);
                    assert_eq!(hsv_to_rgb(hsv), c);
                }
            }
        }
    }
}
