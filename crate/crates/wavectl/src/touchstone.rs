//! Touchstone version 1 one-port reader.

use num_complex::Complex64;
use wavectl_core::unitcell::{ImpedancePoint, ImpedanceSamples};

/// Malformed Touchstone input, with the 1-based line it was found on.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("touchstone line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    S,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    RealImaginary,
    MagnitudeAngle,
    DecibelAngle,
}

/// Contents of the `#` option line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Multiplier to Hz.
    pub frequency_scale: f64,
    pub parameter: Parameter,
    pub format: DataFormat,
    pub reference: f64,
}

impl Default for Options {
    /// `# GHz S MA R 50`.
    fn default() -> Self {
        Options {
            frequency_scale: 1e9,
            parameter: Parameter::S,
            format: DataFormat::MagnitudeAngle,
            reference: 50.0,
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

pub fn parse_options(body: &str, line: usize) -> Result<Options, ParseError> {
    let mut o = Options::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => o.frequency_scale = 1.0,
            "KHZ" => o.frequency_scale = 1e3,
            "MHZ" => o.frequency_scale = 1e6,
            "GHZ" => o.frequency_scale = 1e9,
            "S" => o.parameter = Parameter::S,
            "Y" => o.parameter = Parameter::Y,
            "Z" => o.parameter = Parameter::Z,
            "RI" => o.format = DataFormat::RealImaginary,
            "MA" => o.format = DataFormat::MagnitudeAngle,
            "DB" => o.format = DataFormat::DecibelAngle,
            "R" => {
                let v = tokens
                    .next()
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|r| *r > 0.0 && r.is_finite())
                    .ok_or_else(|| err(line, "R must be followed by a positive reference impedance"))?;
                o.reference = v;
            }
            other => return Err(err(line, format!("unsupported option `{other}`"))),
        }
    }
    Ok(o)
}

fn value(o: &Options, a: f64, b: f64) -> Complex64 {
    match o.format {
        DataFormat::RealImaginary => Complex64::new(a, b),
        DataFormat::MagnitudeAngle => Complex64::from_polar(a, b.to_radians()),
        DataFormat::DecibelAngle => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

/// Parse a `.s1p` document into impedance samples.
///
/// S data convert as `Z = R (1 + S) / (1 - S)`; Z and Y data are normalized
/// to `R` as in version 1 files.
pub fn parse_s1p(text: &str) -> Result<ImpedanceSamples, ParseError> {
    let mut options: Option<Options> = None;
    let mut points: Vec<ImpedancePoint> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(body) = content.strip_prefix('#') {
            if options.is_none() {
                options = Some(parse_options(body, line)?);
            }
            continue;
        }
        let o = options.unwrap_or_default();
        let nums: Vec<f64> = content
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(line, format!("`{t}` is not a number"))))
            .collect::<Result<_, _>>()?;
        if nums.len() != 3 {
            return Err(err(line, format!("expected 3 values for a one-port row, found {}", nums.len())));
        }
        if nums.iter().any(|x| !x.is_finite()) {
            return Err(err(line, "non-finite value"));
        }
        let f = nums[0] * o.frequency_scale;
        if let Some(prev) = points.last() {
            if !(f > prev.frequency) {
                return Err(err(line, "frequencies must strictly increase"));
            }
        }
        let v = value(&o, nums[1], nums[2]);
        let r = o.reference;
        let z = match o.parameter {
            Parameter::S => {
                let den = Complex64::new(1.0, 0.0) - v;
                if den == Complex64::new(0.0, 0.0) {
                    return Err(err(line, "S = 1 leaves the impedance undefined"));
                }
                r * (1.0 + v) / den
            }
            Parameter::Z => r * v,
            Parameter::Y => {
                if v == Complex64::new(0.0, 0.0) {
                    return Err(err(line, "Y = 0 leaves the impedance undefined"));
                }
                r / v
            }
        };
        points.push(ImpedancePoint {
            frequency: f,
            impedance: z,
        });
    }
    if points.is_empty() {
        return Err(err(text.lines().count().max(1), "no data rows"));
    }
    Ok(ImpedanceSamples {
        reference_impedance: options.unwrap_or_default().reference,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_reflection_is_reference() {
        let s = parse_s1p("! sweep\n# MHz S MA R 50\n100 0 0\n200 0 0\n").unwrap();
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[1].frequency, 200e6);
        assert!(s.points.iter().all(|p| p.impedance == Complex64::new(50.0, 0.0)));
    }

    #[test]
    fn imaginary_unit_reflection() {
        let s = parse_s1p("# Hz S RI R 50\n1e9 0 1\n").unwrap();
        let z = s.points[0].impedance;
        assert!(z.re.abs() < 1e-12 && (z.im - 50.0).abs() < 1e-12, "{z}");
    }

    #[test]
    fn decibel_format_and_kilohertz() {
        let s = parse_s1p("# kHz S DB R 75\n5 -6.020599913279624 180\n").unwrap();
        let z = s.points[0].impedance;
        // |S| = 0.5 at 180 deg: 75 (0.5 / 1.5)
        assert!((z.re - 25.0).abs() < 1e-9 && z.im.abs() < 1e-9, "{z}");
        assert_eq!(s.points[0].frequency, 5e3);
        assert_eq!(s.reference_impedance, 75.0);
    }

    #[test]
    fn defaults_without_option_line() {
        let s = parse_s1p("2.45 0 0\n").unwrap();
        assert_eq!(s.points[0].frequency, 2.45e9);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_s1p("! c\n# MHz S XX R 50\n1 0 0\n").unwrap_err().line, 2);
        assert_eq!(parse_s1p("# MHz S RI R\n1 0 0\n").unwrap_err().line, 1);
        assert_eq!(parse_s1p("# MHz S RI R 50\n2 0 0\n1 0 0\n").unwrap_err().line, 3);
        assert_eq!(parse_s1p("# MHz S RI R 50\n1 0 0\n2 1 0\n").unwrap_err().line, 3);
        assert_eq!(parse_s1p("# MHz S RI R 50\n1 0\n").unwrap_err().line, 2);
    }
}
