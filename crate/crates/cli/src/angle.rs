//! Angles written as symbolic multiples of π: `pi/12`, `2pi`, `-3pi/2`,
//! `0.5`, `1.5*pi`, `π/4`.

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t: String = text.trim().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty angle".into());
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => {
            let d: f64 = d.parse().map_err(|_| format!("bad denominator in angle '{text}'"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in angle '{text}'"));
            }
            (n, d)
        }
        None => (t.as_str(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| format!("bad coefficient in angle '{text}'"))?,
            };
            c * PI / den
        }
        None => num.parse::<f64>().map_err(|_| format!("bad angle '{text}'"))? / den,
    };
    if !value.is_finite() {
        return Err(format!("angle '{text}' is not finite"));
    }
    Ok(value)
}

/// Comma-separated angles, or an inclusive range `start:stop:step`.
pub fn parse_angle_list(text: &str) -> Result<Vec<f64>, String> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = t.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_angle(start)?, parse_angle(stop)?, parse_angle(step)?);
            if step <= 0.0 || stop < start {
                return Err(format!("range '{text}' needs start ≤ stop and a positive step"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| start + k as f64 * step).collect())
        }
        [_] => t.split(',').map(parse_angle).collect(),
        _ => Err(format!("bad angle list '{text}'")),
    }
}
