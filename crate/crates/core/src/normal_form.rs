//! Basic symplectic normal forms, their ⋄-sums, circle spectra, nullities and
//! splitting numbers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotation::RotationNumber;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// One basic block. Dimensions: 2 for `N1`, `D`, `R`; 4 for `N2`;
/// `2 * half_dim` for `OffCircle`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBlock", into = "RawBlock")]
pub enum BasicBlock {
    /// `[[λ, b], [0, λ]]` with `λ = ±1` and `b ∈ {-1, 0, 1}`.
    N1 { lambda: i8, b: i8 },
    /// `diag(±2, ±1/2)`.
    D { sign: Sign },
    /// Rotation by `2πρ`, `ρ ≠ 1/2`.
    R { rho: RotationNumber },
    /// `[[R(2πρ), B], [0, R(2πρ)]]`; nontrivial when `(b2 - b3) sin θ < 0`.
    N2 { rho: RotationNumber, trivial: bool },
    /// Spectrum off the unit circle and off the real line.
    OffCircle { half_dim: u32 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum RawBlock {
    N1 { lambda: i8, b: i8 },
    D { sign: Sign },
    R { rho: RotationNumber },
    N2 { rho: RotationNumber, trivial: bool },
    OffCircle { half_dim: u32 },
}

impl TryFrom<RawBlock> for BasicBlock {
    type Error = Error;
    fn try_from(r: RawBlock) -> Result<Self> {
        match r {
            RawBlock::N1 { lambda, b } => BasicBlock::n1(lambda, b),
            RawBlock::D { sign } => Ok(BasicBlock::D { sign }),
            RawBlock::R { rho } => BasicBlock::r(rho),
            RawBlock::N2 { rho, trivial } => BasicBlock::n2(rho, trivial),
            RawBlock::OffCircle { half_dim } => BasicBlock::off_circle(half_dim),
        }
    }
}

impl From<BasicBlock> for RawBlock {
    fn from(b: BasicBlock) -> Self {
        match b {
            BasicBlock::N1 { lambda, b } => RawBlock::N1 { lambda, b },
            BasicBlock::D { sign } => RawBlock::D { sign },
            BasicBlock::R { rho } => RawBlock::R { rho },
            BasicBlock::N2 { rho, trivial } => RawBlock::N2 { rho, trivial },
            BasicBlock::OffCircle { half_dim } => RawBlock::OffCircle { half_dim },
        }
    }
}

impl BasicBlock {
    pub fn n1(lambda: i8, b: i8) -> Result<Self> {
        if lambda != 1 && lambda != -1 {
            return Err(Error::Invalid(format!("N1 eigenvalue must be +1 or -1, got {}", lambda)));
        }
        if !(-1..=1).contains(&b) {
            return Err(Error::Invalid(format!("N1 off-diagonal must be -1, 0 or 1, got {}", b)));
        }
        Ok(BasicBlock::N1 { lambda, b })
    }

    pub fn r(rho: RotationNumber) -> Result<Self> {
        if rho.is_half() {
            return Err(Error::Invalid("R block requires rotation number != 1/2".into()));
        }
        Ok(BasicBlock::R { rho })
    }

    pub fn n2(rho: RotationNumber, trivial: bool) -> Result<Self> {
        if rho.is_half() {
            return Err(Error::Invalid("N2 block requires rotation number != 1/2".into()));
        }
        Ok(BasicBlock::N2 { rho, trivial })
    }

    pub fn off_circle(half_dim: u32) -> Result<Self> {
        if half_dim == 0 {
            return Err(Error::Invalid("OffCircle block needs half dimension >= 1".into()));
        }
        Ok(BasicBlock::OffCircle { half_dim })
    }

    pub fn half_dim(&self) -> u32 {
        match self {
            BasicBlock::N1 { .. } | BasicBlock::D { .. } | BasicBlock::R { .. } => 1,
            BasicBlock::N2 { .. } => 2,
            BasicBlock::OffCircle { half_dim } => *half_dim,
        }
    }

    /// `(S⁺_M(ω), S⁻_M(ω))` for this block.
    pub fn splitting_pair(&self, w: &UnitPoint) -> Result<(u32, u32)> {
        Ok(match (self, w) {
            (BasicBlock::N1 { lambda: 1, b }, UnitPoint::One) => {
                if *b >= 0 {
                    (1, 1)
                } else {
                    (0, 0)
                }
            }
            (BasicBlock::N1 { lambda: -1, b }, UnitPoint::MinusOne) => {
                if *b <= 0 {
                    (1, 1)
                } else {
                    (0, 0)
                }
            }
            (BasicBlock::R { rho }, UnitPoint::Angle(a)) => {
                if a.same_point(rho)? {
                    (0, 1)
                } else if a.same_point(&rho.conjugate())? {
                    (1, 0)
                } else {
                    (0, 0)
                }
            }
            (BasicBlock::N2 { rho, trivial }, UnitPoint::Angle(a))
                if !*trivial && (a.same_point(rho)? || a.same_point(&rho.conjugate())?) => {
                    (1, 1)
                }
            _ => (0, 0),
        })
    }

    /// `dim_C ker(M - ω I)` for this block.
    pub fn circle_nullity(&self, w: &UnitPoint) -> Result<u32> {
        Ok(match (self, w) {
            (BasicBlock::N1 { lambda: 1, b }, UnitPoint::One)
            | (BasicBlock::N1 { lambda: -1, b }, UnitPoint::MinusOne) => {
                if *b == 0 {
                    2
                } else {
                    1
                }
            }
            (BasicBlock::R { rho }, UnitPoint::Angle(a))
            | (BasicBlock::N2 { rho, .. }, UnitPoint::Angle(a)) => {
                u32::from(a.same_point(rho)? || a.same_point(&rho.conjugate())?)
            }
            _ => 0,
        })
    }

    /// Points `e^{2πia}` carrying negative splitting, with their weights.
    pub fn negative_splitting_points(&self) -> Vec<(RotationNumber, u32)> {
        match self {
            BasicBlock::N1 { lambda: -1, b } if *b <= 0 => {
                vec![(RotationNumber::rational(1, 2).expect("1/2"), 1)]
            }
            BasicBlock::R { rho } => vec![(rho.clone(), 1)],
            BasicBlock::N2 { rho, trivial: false } => vec![(rho.clone(), 1), (rho.conjugate(), 1)],
            _ => Vec::new(),
        }
    }

    pub fn rotation(&self) -> Option<&RotationNumber> {
        match self {
            BasicBlock::R { rho } | BasicBlock::N2 { rho, .. } => Some(rho),
            _ => None,
        }
    }
}

impl fmt::Display for BasicBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicBlock::N1 { lambda, b } => write!(f, "N1({},{})", lambda, b),
            BasicBlock::D { sign: Sign::Plus } => write!(f, "D(+)"),
            BasicBlock::D { sign: Sign::Minus } => write!(f, "D(-)"),
            BasicBlock::R { rho } => write!(f, "R({})", rho),
            BasicBlock::N2 { rho, trivial } => {
                write!(f, "N2({},{})", rho, if *trivial { "trivial" } else { "nontrivial" })
            }
            BasicBlock::OffCircle { half_dim } => write!(f, "OffCircle({})", half_dim),
        }
    }
}

/// A point of the unit circle given exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitPoint {
    One,
    MinusOne,
    /// `e^{2πiρ}` with `ρ ∈ (0,1) \ {1/2}`.
    Angle(RotationNumber),
}

impl UnitPoint {
    pub fn angle(rho: RotationNumber) -> Self {
        if rho.is_half() {
            UnitPoint::MinusOne
        } else {
            UnitPoint::Angle(rho)
        }
    }

    pub fn conjugate(&self) -> Self {
        match self {
            UnitPoint::Angle(r) => UnitPoint::Angle(r.conjugate()),
            other => other.clone(),
        }
    }
}

/// ⋄-sum of basic blocks, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalForm {
    pub blocks: Vec<BasicBlock>,
}

/// `(r, s, r*, r₀)`: rotations, hyperbolic pairs, nontrivial and trivial `N2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockCounts {
    pub r: u32,
    pub s: u32,
    pub r_star: u32,
    pub r0: u32,
}

impl NormalForm {
    pub fn new(blocks: Vec<BasicBlock>) -> Self {
        NormalForm { blocks }
    }

    pub fn empty() -> Self {
        NormalForm::default()
    }

    pub fn half_dim(&self) -> u32 {
        self.blocks.iter().map(BasicBlock::half_dim).sum()
    }

    pub fn diamond_sum(&self, other: &NormalForm) -> NormalForm {
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        NormalForm { blocks }
    }

    pub fn splitting_pair(&self, w: &UnitPoint) -> Result<(u32, u32)> {
        let mut acc = (0, 0);
        for b in &self.blocks {
            let (p, m) = b.splitting_pair(w)?;
            acc.0 += p;
            acc.1 += m;
        }
        Ok(acc)
    }

    pub fn circle_nullity(&self, w: &UnitPoint) -> Result<u32> {
        let mut acc = 0;
        for b in &self.blocks {
            acc += b.circle_nullity(w)?;
        }
        Ok(acc)
    }

    /// `S⁺_M(1)`.
    pub fn splitting_plus_at_one(&self) -> u32 {
        self.blocks
            .iter()
            .filter(|b| matches!(b, BasicBlock::N1 { lambda: 1, b } if *b >= 0))
            .count() as u32
    }

    /// `C(M)`, the total negative splitting over the open circle minus 1.
    pub fn elliptic_count(&self) -> u32 {
        self.negative_splitting_points().iter().map(|(_, w)| *w).sum()
    }

    pub fn negative_splitting_points(&self) -> Vec<(RotationNumber, u32)> {
        self.blocks.iter().flat_map(BasicBlock::negative_splitting_points).collect()
    }

    pub fn counts(&self) -> BlockCounts {
        let mut c = BlockCounts { r: 0, s: 0, r_star: 0, r0: 0 };
        for b in &self.blocks {
            match b {
                BasicBlock::R { .. } => c.r += 1,
                BasicBlock::D { .. } => c.s += 1,
                BasicBlock::N2 { trivial: false, .. } => c.r_star += 1,
                BasicBlock::N2 { trivial: true, .. } => c.r0 += 1,
                _ => {}
            }
        }
        c
    }

    /// Every point of the circle where some block has spectrum, as `UnitPoint`s
    /// (both conjugates of each rotation).
    pub fn circle_points(&self) -> Vec<UnitPoint> {
        let mut out: Vec<UnitPoint> = Vec::new();
        let mut push = |p: UnitPoint| {
            if !out.contains(&p) {
                out.push(p);
            }
        };
        for b in &self.blocks {
            match b {
                BasicBlock::N1 { lambda: 1, .. } => push(UnitPoint::One),
                BasicBlock::N1 { .. } => push(UnitPoint::MinusOne),
                BasicBlock::R { rho } | BasicBlock::N2 { rho, .. } => {
                    push(UnitPoint::Angle(rho.clone()));
                    push(UnitPoint::Angle(rho.conjugate()));
                }
                _ => {}
            }
        }
        out
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(" ⋄ "))
    }
}
