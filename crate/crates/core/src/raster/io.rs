use std::fmt::Write as _;

use super::{BandRaster, GridHeader, ProbWaterMask, RasterError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RasterKind {
    /// `BND`: any band or index raster.
    Band,
    /// `PWM`: probabilistic water mask.
    WaterMask,
}

fn parse_err(msg: impl Into<String>) -> RasterError {
    RasterError::Parse(msg.into())
}

/// Reads the text format: a header line `PWM|BND width height x0 y0 res`,
/// `width * height` values, then optionally `VALID` and as many 0/1 flags.
/// Lines starting with `#` are comments.
pub fn parse_raster(text: &str) -> Result<(RasterKind, BandRaster), RasterError> {
    let mut tokens = text.lines().filter(|l| !l.trim_start().starts_with('#')).flat_map(str::split_whitespace);
    let kind = match tokens.next() {
        Some("PWM") => RasterKind::WaterMask,
        Some("BND") => RasterKind::Band,
        Some(other) => return Err(parse_err(format!("unknown raster tag {other:?}"))),
        None => return Err(parse_err("empty input")),
    };
    let mut field = |name: &str| tokens.next().ok_or_else(|| parse_err(format!("missing {name}")));
    let width: usize = field("width")?.parse().map_err(|_| parse_err("bad width"))?;
    let height: usize = field("height")?.parse().map_err(|_| parse_err("bad height"))?;
    let x0: f64 = field("x0")?.parse().map_err(|_| parse_err("bad x0"))?;
    let y0: f64 = field("y0")?.parse().map_err(|_| parse_err("bad y0"))?;
    let res: f64 = field("res")?.parse().map_err(|_| parse_err("bad resolution"))?;
    let header = GridHeader::new(width, height, x0, y0, res)?;
    let n = header.len();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let t = tokens.next().ok_or_else(|| parse_err(format!("expected {n} values, found {i}")))?;
        values.push(t.parse::<f64>().map_err(|_| parse_err(format!("bad value {t:?}")))?);
    }
    let valid = match tokens.next() {
        None => None,
        Some("VALID") => {
            let mut flags = Vec::with_capacity(n);
            for i in 0..n {
                match tokens.next() {
                    Some("1") => flags.push(true),
                    Some("0") => flags.push(false),
                    Some(t) => return Err(parse_err(format!("bad validity flag {t:?}"))),
                    None => return Err(parse_err(format!("expected {n} validity flags, found {i}"))),
                }
            }
            Some(flags)
        }
        Some(t) => return Err(parse_err(format!("unexpected token {t:?} after values"))),
    };
    if let Some(t) = tokens.next() {
        return Err(parse_err(format!("trailing token {t:?}")));
    }
    Ok((kind, BandRaster::new(header, values, valid)?))
}

fn write_grid(tag: &str, header: &GridHeader, values: &[f64], valid: Option<&[bool]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{tag} {} {} {} {} {}", header.width, header.height, header.x0, header.y0, header.res);
    for row in values.chunks(header.width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    if let Some(valid) = valid {
        out.push_str("VALID\n");
        for row in valid.chunks(header.width) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

impl BandRaster {
    pub fn to_text(&self) -> String {
        write_grid("BND", &self.header, &self.values, self.valid.as_deref())
    }

    pub fn from_text(text: &str) -> Result<Self, RasterError> {
        Ok(parse_raster(text)?.1)
    }
}

impl ProbWaterMask {
    pub fn to_text(&self) -> String {
        write_grid("PWM", &self.header, &self.probs, self.valid.as_deref())
    }

    pub fn from_text(text: &str) -> Result<Self, RasterError> {
        let (kind, band) = parse_raster(text)?;
        if kind != RasterKind::WaterMask {
            return Err(parse_err("expected a PWM raster"));
        }
        let mut mask = ProbWaterMask::new(band.header, band.values)?;
        mask.valid = band.valid;
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_header_values_and_validity() {
        let text = "BND 2 2 10 20 5\n0.1 0.2\n0.3 0.4\nVALID\n1 0\n1 1\n";
        let (kind, r) = parse_raster(text).unwrap();
        assert_eq!(kind, RasterKind::Band);
        assert_eq!(r.header, GridHeader { width: 2, height: 2, x0: 10.0, y0: 20.0, res: 5.0 });
        assert_eq!(r.values, vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(r.valid, Some(vec![true, false, true, true]));
    }

    #[test]
    fn comment_lines_are_skipped() {
        let text = "# made by hand\nPWM 1 2 0 0 1\n# row 0\n0.25\n1\n";
        let mask = ProbWaterMask::from_text(text).unwrap();
        assert_eq!(mask.probs, vec![0.25, 1.0]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_raster("").is_err());
        assert!(parse_raster("XYZ 1 1 0 0 1 0").is_err());
        assert!(parse_raster("BND 2 1 0 0 1 0.5").is_err());
        assert!(parse_raster("BND 1 1 0 0 1 0.5 extra").is_err());
        assert!(parse_raster("BND 1 1 0 0 1 0.5 VALID 2").is_err());
        assert!(ProbWaterMask::from_text("PWM 1 1 0 0 1 1.5").is_err());
        assert!(ProbWaterMask::from_text("BND 1 1 0 0 1 0.5").is_err());
    }

    proptest! {
        #[test]
        fn mask_round_trip(w in 1usize..6, h in 1usize..6, seed in any::<u64>(), with_valid in any::<bool>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let header = GridHeader::new(w, h, -12.5, 3e5, 10.0).unwrap();
            let probs: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
            let mut mask = ProbWaterMask::new(header, probs).unwrap();
            if with_valid {
                mask.valid = Some((0..w * h).map(|_| rng.random::<bool>()).collect());
            }
            prop_assert_eq!(ProbWaterMask::from_text(&mask.to_text()).unwrap(), mask);
        }
    }
}
