use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facial::chain::{eliminate, relint_point, Constraint};
use crate::facial::face::{is_regularized, Face, FrSequence};
use crate::generators::unmess;
use crate::scalar::Rat;
use crate::sdpmodel::SdpInstance;
use crate::symkernel::SymMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    /// `Aᵢ•Y = cᵢ, Y ⪰ 0`
    D,
    /// `Aᵢ•Y = 0, B•Y = 0, Y ⪰ 0`
    HD,
}

impl std::str::FromStr for Which {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D" => Ok(Which::D),
            "HD" => Ok(Which::HD),
            other => Err(Error::InvalidArgument(format!("expected D or HD, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Which {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Which::D => "D",
            Which::HD => "HD",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MinimalCone {
    pub which: Which,
    pub face: Face,
    pub chain: Vec<Face>,
    pub sequence: FrSequence,
    /// feasible point in the relative interior of `face`
    pub witness: SymMat<Rat>,
    /// face, chain and witness are in unmessed coordinates
    pub unmessed: bool,
}

/// Constraint list of (D) or (HD). HD puts `B` first.
pub fn constraint_list(inst: &SdpInstance, which: Which) -> Vec<Constraint> {
    let mut out = Vec::with_capacity(inst.m() + 1);
    if which == Which::HD {
        out.push(Constraint {
            mat: inst.b().clone(),
            rhs: Rat::zero(),
            label: "B".into(),
        });
    }
    for (i, (a, c)) in inst.a().iter().zip(inst.c()).enumerate() {
        out.push(Constraint {
            mat: a.clone(),
            rhs: if which == Which::HD { Rat::zero() } else { c.clone() },
            label: format!("A{}", i + 1),
        });
    }
    out
}

/// Smallest face containing the feasible set, reached by exact elimination
/// and confirmed by a feasible point in its relative interior.
pub fn minimal_cone(inst: &SdpInstance, which: Which) -> Result<MinimalCone> {
    let unmessed = inst.meta.mess.is_some();
    let work = unmess(inst)?;
    let cons = constraint_list(&work, which);
    let elim = eliminate(&cons, work.n());
    if elim.infeasible {
        let last = elim.steps.last().map(|s| s.label.clone()).unwrap_or_default();
        return Err(Error::Infeasible(format!("{which} is infeasible (detected at {last})")));
    }
    let pairs: Vec<(SymMat<Rat>, Rat)> = cons.iter().map(|c| (c.mat.clone(), c.rhs.clone())).collect();
    let face = elim.face().clone();
    let witness = relint_point(&face, &pairs).ok_or_else(|| {
        Error::Unstructured(format!(
            "no relative interior point of {face} found; the chain may have stalled"
        ))
    })?;
    let regularized = is_regularized(&elim.members);
    Ok(MinimalCone {
        which,
        face,
        chain: elim.faces,
        sequence: FrSequence {
            matrices: elim.members,
            labels: elim.member_labels,
            strict: true,
            regularized,
        },
        witness,
        unmessed,
    })
}
