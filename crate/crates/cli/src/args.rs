//! Parsing of the textual flags into validated run specifications.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use qwscatter::{Coin, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct ArgError(pub String);

impl fmt::Display for ArgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ArgError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ArgError> {
    Err(ArgError(msg.into()))
}

/// A real number, optionally written with `pi`: `1.5`, `pi`, `-pi/4`, `2pi/3`, `0.5*pi`.
pub fn parse_real(s: &str) -> Result<f64, ArgError> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let Some(pos) = t.find("pi") else {
        return err(format!("cannot parse number '{s}'"));
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let head = head.trim_end_matches('*');
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h
            .parse::<f64>()
            .map_err(|_| ArgError(format!("cannot parse number '{s}'")))?,
    };
    let divisor = match tail {
        "" => 1.0,
        d => match d.strip_prefix('/') {
            Some(d) => d
                .parse::<f64>()
                .map_err(|_| ArgError(format!("cannot parse number '{s}'")))?,
            None => return err(format!("cannot parse number '{s}'")),
        },
    };
    if divisor == 0.0 {
        return err(format!("division by zero in '{s}'"));
    }
    Ok(factor * PI / divisor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoinPreset {
    Identity,
    Hadamard,
    Rotation(f64),
}

impl FromStr for CoinPreset {
    type Err = ArgError;

    fn from_str(s: &str) -> Result<Self, ArgError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" => Ok(CoinPreset::Identity),
            "hadamard" => Ok(CoinPreset::Hadamard),
            other => match other.strip_prefix("rotation:") {
                Some(angle) => Ok(CoinPreset::Rotation(parse_real(angle)?)),
                None => err(format!(
                    "unknown coin '{s}' (identity, hadamard, rotation:<angle>)"
                )),
            },
        }
    }
}

impl CoinPreset {
    pub fn coin(&self) -> Coin {
        match *self {
            CoinPreset::Identity => Coin::identity(),
            CoinPreset::Hadamard => Coin::hadamard(),
            CoinPreset::Rotation(t) => Coin::rotation(t),
        }
    }
}

/// Eight reals `re,im` for `a, b, c, d`.
pub fn coin_from_entries(v: &[f64]) -> Result<Coin, ArgError> {
    if v.len() != 8 {
        return err(format!("--coin-entries needs 8 numbers, got {}", v.len()));
    }
    let c = |i: usize| C64::new(v[2 * i], v[2 * i + 1]);
    Coin::new(c(0), c(1), c(2), c(3)).map_err(|e| ArgError(e.to_string()))
}

pub fn resolve_coin(preset: Option<&str>, entries: Option<&[f64]>) -> Result<Coin, ArgError> {
    match (preset, entries) {
        (Some(_), Some(_)) => err("give either --coin or --coin-entries, not both"),
        (Some(p), None) => Ok(p.parse::<CoinPreset>()?.coin()),
        (None, Some(e)) => coin_from_entries(e),
        (None, None) => Ok(Coin::hadamard()),
    }
}

/// `lo:hi:factor` (geometric, integer factor >= 2) or `lo:hi:+step` (arithmetic).
pub fn parse_m_range(s: &str) -> Result<Vec<usize>, ArgError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return err(format!("--M-range '{s}' is not lo:hi:factor"));
    }
    let num = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| ArgError(format!("bad integer '{p}' in --M-range")))
    };
    let (lo, hi) = (num(parts[0])?, num(parts[1])?);
    if lo == 0 || hi < lo {
        return err(format!("--M-range '{s}' needs 1 <= lo <= hi"));
    }
    let mut out = Vec::new();
    if let Some(step) = parts[2].trim().strip_prefix('+') {
        let step = num(step)?;
        if step == 0 {
            return err("--M-range step must be positive");
        }
        out.extend((lo..=hi).step_by(step));
    } else {
        let factor = num(parts[2])?;
        if factor < 2 {
            return err("--M-range factor must be at least 2");
        }
        let mut m = lo;
        while m <= hi {
            out.push(m);
            m = match m.checked_mul(factor) {
                Some(n) => n,
                None => break,
            };
        }
    }
    Ok(out)
}

/// `lo:hi:n`, `n` points `lo + j (hi - lo)/n`, the endpoint `hi` excluded.
pub fn parse_k_grid(s: &str) -> Result<Vec<f64>, ArgError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return err(format!("--k-grid '{s}' is not lo:hi:n"));
    }
    let (lo, hi) = (parse_real(parts[0])?, parse_real(parts[1])?);
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| ArgError(format!("bad point count '{}' in --k-grid", parts[2])))?;
    if n == 0 {
        return err("--k-grid is empty");
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return err("--k-grid bounds must be finite");
    }
    let h = (hi - lo) / n as f64;
    Ok((0..n).map(|j| lo + j as f64 * h).collect())
}

pub fn parse_design(s: &str) -> Result<(f64, f64), ArgError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return err(format!("--design '{s}' is not x,alpha"));
    }
    Ok((parse_real(parts[0])?, parse_real(parts[1])?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Closed,
    Solve,
    Iterate,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Closed => "closed",
            Route::Solve => "solve",
            Route::Iterate => "iterate",
        }
    }
}

pub fn parse_routes(s: &str) -> Result<Vec<Route>, ArgError> {
    let mut out = Vec::new();
    for r in s.split(',') {
        let route = match r.trim() {
            "closed" => Route::Closed,
            "solve" => Route::Solve,
            "iterate" => Route::Iterate,
            other => return err(format!("unknown route '{other}' (closed, solve, iterate)")),
        };
        if !out.contains(&route) {
            out.push(route);
        }
    }
    if out.is_empty() {
        return err("no route requested");
    }
    Ok(out)
}

/// Block sizes from exactly one of `--M` and `--M-range`.
pub fn resolve_sizes(m: Option<usize>, range: Option<&str>) -> Result<Vec<usize>, ArgError> {
    match (m, range) {
        (Some(_), Some(_)) => err("give either --M or --M-range, not both"),
        (Some(0), None) => err("--M must be at least 1"),
        (Some(m), None) => Ok(vec![m]),
        (None, Some(r)) => parse_m_range(r),
        (None, None) => err("missing --M"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencySpec {
    Grid(Vec<f64>),
    Design { x: f64, alpha: f64 },
}

pub fn resolve_frequencies(
    k: Option<&str>,
    grid: Option<&str>,
    design: Option<&str>,
) -> Result<FrequencySpec, ArgError> {
    match (k, grid, design) {
        (Some(k), None, None) => Ok(FrequencySpec::Grid(vec![parse_real(k)?])),
        (None, Some(g), None) => Ok(FrequencySpec::Grid(parse_k_grid(g)?)),
        (None, None, Some(d)) => {
            let (x, alpha) = parse_design(d)?;
            Ok(FrequencySpec::Design { x, alpha })
        }
        (None, None, None) => err("missing --k, --k-grid or --design"),
        _ => err("give only one of --k, --k-grid and --design"),
    }
}
