//! Small grammars for grid, list, range, angle and target-state arguments.

use pqec::qstate::PureState;
use pqec::threshold::linspace;

use crate::config::UsageError;

/// Real values from `min:max:count` (inclusive), `a,b,c`, or a single value.
pub fn parse_real_values(key: &'static str, text: &str) -> Result<Vec<f64>, UsageError> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(UsageError::new(key, format!("grid {text:?} must be min:max:count")));
        }
        let min = parse_real(key, parts[0])?;
        let max = parse_real(key, parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| UsageError::new(key, format!("grid count {:?} is not an integer", parts[2])))?;
        if count == 0 {
            return Err(UsageError::new(key, "grid count must be positive"));
        }
        if count > 1 && max < min {
            return Err(UsageError::new(key, format!("grid {text:?} has max < min")));
        }
        return Ok(linspace(min, max, count));
    }
    text.split(',').map(|s| parse_real(key, s)).collect()
}

fn parse_real(key: &'static str, s: &str) -> Result<f64, UsageError> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| UsageError::new(key, format!("{s:?} is not a finite number")))
}

/// Integers from `a..b` (inclusive), `a,b,c`, or a single value.
pub fn parse_int_values(key: &'static str, text: &str) -> Result<Vec<u32>, UsageError> {
    let text = text.trim();
    let int = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| UsageError::new(key, format!("{:?} is not a non-negative integer", s.trim())))
    };
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
        if b < a {
            return Err(UsageError::new(key, format!("range {text:?} is empty")));
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(int).collect()
}

/// Angles such as `0.5`, `pi`, `-pi/4`, `2pi/3` or `2*pi/3`.
pub fn parse_angle(key: &'static str, text: &str) -> Result<f64, UsageError> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let bad = || UsageError::new(key, format!("cannot read angle {text:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s.as_str(), None),
    };
    let numerator = if let Some(coeff) = num.strip_suffix("pi") {
        let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
        let c = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| bad())?,
        };
        c * std::f64::consts::PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(bad());
            }
            numerator / d
        }
        None => numerator,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// A parsed target-state description.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    /// Qubit count given with `^M`, if any.
    pub qubits: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Plus,
    Zero,
    /// The same single-qubit Bloch state on every qubit.
    Bloch {
        theta: f64,
        phi: f64,
    },
}

impl StateSpec {
    pub fn build(&self, num_qubits: usize) -> pqec::Result<PureState> {
        match self.kind {
            StateKind::Plus => PureState::plus(num_qubits),
            StateKind::Zero => PureState::zero(num_qubits),
            StateKind::Bloch { theta, phi } => PureState::bloch_product(theta, phi, num_qubits),
        }
    }
}

/// `plus`, `zero`, `plus^M`, `zero^M`, `bloch:theta,phi` or `bloch:theta,phi^M`.
pub fn parse_state(text: &str) -> Result<StateSpec, UsageError> {
    const KEY: &str = "state";
    let text = text.trim();
    let (body, qubits) = match text.rsplit_once('^') {
        Some((b, m)) => {
            let m: usize = m
                .trim()
                .parse()
                .map_err(|_| UsageError::new(KEY, format!("qubit count {m:?} is not an integer")))?;
            (b.trim(), Some(m))
        }
        None => (text, None),
    };
    let kind = match body.to_lowercase().as_str() {
        "plus" | "+" => StateKind::Plus,
        "zero" | "0" => StateKind::Zero,
        other => {
            let angles = other
                .strip_prefix("bloch:")
                .ok_or_else(|| UsageError::new(KEY, format!("unknown state {text:?}")))?;
            let (theta, phi) = angles
                .split_once(',')
                .ok_or_else(|| UsageError::new(KEY, "bloch state needs theta,phi"))?;
            StateKind::Bloch {
                theta: parse_angle(KEY, theta)?,
                phi: parse_angle(KEY, phi)?,
            }
        }
    };
    Ok(StateSpec { kind, qubits })
}
