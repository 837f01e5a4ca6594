//! Integers on two intertwined strands, one unit per π turn, and the
//! expansion-based boolean operators evaluated on the same helix.
//!
//! The positive strand runs clockwise away from `+0`, the negative strand
//! counter-clockwise away from `-0`. The two zeros are distinct points that
//! decode to the same integer; passing between them costs no turn.

use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strand {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Turn {
    /// Clockwise: increasing.
    Cw,
    /// Counter-clockwise: decreasing.
    Ccw,
}

impl Turn {
    pub fn reverse(self) -> Turn {
        match self {
            Turn::Cw => Turn::Ccw,
            Turn::Ccw => Turn::Cw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HelixPoint {
    pub strand: Strand,
    /// Number of π turns away from this strand's zero.
    pub mag: u64,
}

impl HelixPoint {
    pub const POSITIVE_ZERO: HelixPoint = HelixPoint {
        strand: Strand::Positive,
        mag: 0,
    };
    pub const NEGATIVE_ZERO: HelixPoint = HelixPoint {
        strand: Strand::Negative,
        mag: 0,
    };

    pub fn new(strand: Strand, mag: u64) -> Self {
        HelixPoint { strand, mag }
    }

    pub fn is_zero(&self) -> bool {
        self.mag == 0
    }

    /// One π turn. Leaving a zero toward the other strand first jumps to
    /// the other zero at no cost.
    pub fn step(self, dir: Turn) -> Result<HelixPoint> {
        let (toward_zero, away) = match (self.strand, dir) {
            (Strand::Positive, Turn::Cw) | (Strand::Negative, Turn::Ccw) => (false, self.strand),
            (Strand::Positive, Turn::Ccw) => (true, Strand::Negative),
            (Strand::Negative, Turn::Cw) => (true, Strand::Positive),
        };
        if !toward_zero {
            let mag = self.mag.checked_add(1).ok_or(Error::Overflow)?;
            return Ok(HelixPoint::new(self.strand, mag));
        }
        if self.mag > 0 {
            Ok(HelixPoint::new(self.strand, self.mag - 1))
        } else {
            Ok(HelixPoint::new(away, 1))
        }
    }

    /// `units` π turns in direction `dir`; same result as stepping `units`
    /// times.
    pub fn turn(self, dir: Turn, units: u64) -> Result<HelixPoint> {
        let outward = matches!(
            (self.strand, dir),
            (Strand::Positive, Turn::Cw) | (Strand::Negative, Turn::Ccw)
        );
        if outward {
            let mag = self.mag.checked_add(units).ok_or(Error::Overflow)?;
            return Ok(HelixPoint::new(self.strand, mag));
        }
        if units <= self.mag {
            return Ok(HelixPoint::new(self.strand, self.mag - units));
        }
        let other = match self.strand {
            Strand::Positive => Strand::Negative,
            Strand::Negative => Strand::Positive,
        };
        Ok(HelixPoint::new(other, units - self.mag))
    }

    /// Iterator over the points visited by `units` unit steps.
    pub fn steps(self, dir: Turn, units: u64) -> Steps {
        Steps {
            at: self,
            dir,
            left: units,
        }
    }
}

impl Default for HelixPoint {
    fn default() -> Self {
        HelixPoint::POSITIVE_ZERO
    }
}

impl core::fmt::Display for HelixPoint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let sign = match self.strand {
            Strand::Positive => '+',
            Strand::Negative => '-',
        };
        write!(f, "{sign}{}π", self.mag)
    }
}

/// Unit-step walk along the helix.
#[derive(Debug, Clone)]
pub struct Steps {
    at: HelixPoint,
    dir: Turn,
    left: u64,
}

impl Iterator for Steps {
    type Item = Result<HelixPoint>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        match self.at.step(self.dir) {
            Ok(p) => {
                self.at = p;
                Some(Ok(p))
            }
            Err(e) => {
                self.left = 0;
                Some(Err(e))
            }
        }
    }
}

pub fn encode(z: i64) -> HelixPoint {
    if z < 0 {
        HelixPoint::new(Strand::Negative, z.unsigned_abs())
    } else {
        HelixPoint::new(Strand::Positive, z as u64)
    }
}

/// Integer at `p`; both zeros decode to 0. Fails for magnitudes beyond
/// `i64`.
pub fn decode(p: HelixPoint) -> Result<i64> {
    match p.strand {
        Strand::Positive => i64::try_from(p.mag).map_err(|_| Error::Overflow),
        Strand::Negative => {
            if p.mag == i64::MIN.unsigned_abs() {
                Ok(i64::MIN)
            } else {
                i64::try_from(p.mag).map(|m| -m).map_err(|_| Error::Overflow)
            }
        }
    }
}

fn signed_turn(y: i64, forward: Turn) -> (Turn, u64) {
    if y >= 0 {
        (forward, y as u64)
    } else {
        (forward.reverse(), y.unsigned_abs())
    }
}

/// `x + y`: turn CW by `|y|` when `y ≥ 0`, CCW otherwise.
pub fn helix_add(x: HelixPoint, y: i64) -> Result<HelixPoint> {
    let (dir, units) = signed_turn(y, Turn::Cw);
    x.turn(dir, units)
}

/// `x - y`: turn CCW by `|y|` when `y ≥ 0`, CW otherwise.
pub fn helix_sub(x: HelixPoint, y: i64) -> Result<HelixPoint> {
    let (dir, units) = signed_turn(y, Turn::Ccw);
    x.turn(dir, units)
}

/// `x · y`: starting at `+0`, repeat a `|y|`-unit turn `|x|` times, CW when
/// the signs agree (or either side is zero) and CCW otherwise.
pub fn helix_mul(x: i64, y: i64) -> Result<HelixPoint> {
    let dir = if x == 0 || y == 0 || (x < 0) == (y < 0) {
        Turn::Cw
    } else {
        Turn::Ccw
    };
    // |x| repetitions of a |y|-unit turn collapse into one turn
    let total = x
        .unsigned_abs()
        .checked_mul(y.unsigned_abs())
        .ok_or(Error::Overflow)?;
    HelixPoint::POSITIVE_ZERO.turn(dir, total)
}

/// A predicate placed on the evaluation helix.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PredicateScore {
    pub theta: f64,
    pub score: f64,
    pub present: bool,
}

impl PredicateScore {
    /// Truth boundary sits at π/2: true iff the score is positive.
    pub fn is_true(&self) -> bool {
        self.score > 0.0
    }

    /// Score for an operand that was not observed.
    pub fn absent() -> Self {
        PredicateScore {
            theta: PI,
            score: -1.0,
            present: false,
        }
    }

    /// Treats a whole-model harmonic value as a single predicate, so a
    /// cluster of characteristics can be tested as one unit.
    pub fn from_harmonic_value(hv: f64) -> Self {
        let score = hv.clamp(-1.0, 1.0);
        PredicateScore {
            theta: libm::acos(score),
            score,
            present: true,
        }
    }
}

pub fn predicate_score(theta: f64, present: bool) -> Result<PredicateScore> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidAngle(theta));
    }
    if !present {
        return Ok(PredicateScore {
            theta,
            score: -1.0,
            present,
        });
    }
    // cos(π/2) is 6e-17 in floating point; pin the boundary to zero
    let score = if theta == FRAC_PI_2 { 0.0 } else { libm::cos(theta) };
    Ok(PredicateScore {
        theta,
        score,
        present,
    })
}

/// Outcome of a boolean evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Expansion {
    pub outcome: f64,
    pub expanded: bool,
}

impl Expansion {
    fn from_outcome(outcome: f64) -> Self {
        Expansion {
            outcome,
            expanded: outcome > 0.0,
        }
    }
}

/// Serial conjunction: the weakest operand decides, and injected activation
/// can push the outcome past zero.
pub fn eval_and(operands: &[PredicateScore], injected_activation: f64) -> Result<Expansion> {
    if !(injected_activation.is_finite() && injected_activation >= 0.0) {
        return Err(Error::InvalidInjection(injected_activation));
    }
    let weakest = operands
        .iter()
        .map(|p| p.score)
        .reduce(f64::min)
        .ok_or(Error::EmptyOperands)?;
    Ok(Expansion::from_outcome(weakest + injected_activation))
}

/// Parallel disjunction: the strongest operand decides.
pub fn eval_or(operands: &[PredicateScore]) -> Result<Expansion> {
    let strongest = operands
        .iter()
        .map(|p| p.score)
        .reduce(f64::max)
        .ok_or(Error::EmptyOperands)?;
    Ok(Expansion::from_outcome(strongest))
}
