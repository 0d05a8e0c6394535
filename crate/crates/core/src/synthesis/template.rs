//! Circuit templates (which pair each two-qubit gate acts on) and their
//! canonical classes under qubit relabelling and time reversal.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{PairLabel, QubitPermutation};

pub const MAX_TEMPLATE_LENGTH: usize = 8;

/// Ordered slots; the first slot is applied first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<PairLabel>", into = "Vec<PairLabel>")]
pub struct CircuitTemplate {
    slots: Vec<PairLabel>,
}

impl CircuitTemplate {
    /// Adjacent slots must differ: two gates on the same pair merge into one.
    pub fn new(slots: Vec<PairLabel>) -> Result<Self> {
        if let Some(w) = slots.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!(
                "adjacent slots share pair {}; they would merge into one gate",
                w[0]
            )));
        }
        Ok(Self { slots })
    }

    pub fn slots(&self) -> &[PairLabel] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn relabeled(&self, p: &QubitPermutation) -> Self {
        Self {
            slots: self.slots.iter().map(|s| s.permuted(p).0).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            slots: self.slots.iter().rev().copied().collect(),
        }
    }

    /// Every image under (6 relabellings) × (reversal or not), with the
    /// symmetry that produced it.
    pub fn orbit_images(&self) -> Vec<(CircuitTemplate, Symmetry)> {
        let mut out = Vec::with_capacity(12);
        for reversed in [false, true] {
            let base = if reversed { self.reversed() } else { self.clone() };
            for p in QubitPermutation::all() {
                out.push((base.relabeled(&p), Symmetry { permutation: p, reversed }));
            }
        }
        out
    }

    /// Lexicographically least member of the orbit.
    pub fn canonical(&self) -> (CircuitTemplate, Symmetry) {
        self.orbit_images()
            .into_iter()
            .min_by(|a, b| a.0.cmp(&b.0))
            .expect("orbit is never empty")
    }
}

impl TryFrom<Vec<PairLabel>> for CircuitTemplate {
    type Error = Error;
    fn try_from(slots: Vec<PairLabel>) -> Result<Self> {
        Self::new(slots)
    }
}

impl From<CircuitTemplate> for Vec<PairLabel> {
    fn from(t: CircuitTemplate) -> Self {
        t.slots
    }
}

impl fmt::Display for CircuitTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.slots.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", names.join("-"))
    }
}

/// Parses `AB-BC-AC` (separators `-`, `,` or whitespace).
impl FromStr for CircuitTemplate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let slots = s
            .split(|c: char| c == '-' || c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<PairLabel>>>()?;
        if slots.is_empty() {
            return Err(invalid("empty template"));
        }
        Self::new(slots)
    }
}

/// A relabelling of qubits, optionally combined with time reversal
/// (relabelling applies after reversal).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Symmetry {
    pub permutation: QubitPermutation,
    pub reversed: bool,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.permutation)?;
        if self.reversed {
            write!(f, ", reversed")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateClass {
    pub canonical: CircuitTemplate,
    pub orbit_size: usize,
    /// Orbit members, sorted.
    pub members: Vec<CircuitTemplate>,
}

impl TemplateClass {
    /// The class a template belongs to.
    pub fn of(t: &CircuitTemplate) -> TemplateClass {
        let mut members: Vec<CircuitTemplate> = t.orbit_images().into_iter().map(|(m, _)| m).collect();
        members.sort();
        members.dedup();
        TemplateClass {
            canonical: members[0].clone(),
            orbit_size: members.len(),
            members,
        }
    }

    pub fn contains(&self, t: &CircuitTemplate) -> bool {
        self.members.binary_search(t).is_ok()
    }

    /// The symmetry carrying `t` onto the canonical representative.
    pub fn symmetry_from(&self, t: &CircuitTemplate) -> Option<Symmetry> {
        t.orbit_images()
            .into_iter()
            .find(|(m, _)| *m == self.canonical)
            .map(|(_, s)| s)
    }
}

/// All adjacent-distinct sequences of the given length.
pub fn all_templates(length: usize) -> Vec<CircuitTemplate> {
    let mut seqs: Vec<Vec<PairLabel>> = vec![vec![]];
    for _ in 0..length {
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                PairLabel::ALL.into_iter().filter_map(move |p| {
                    if s.last() == Some(&p) {
                        None
                    } else {
                        let mut next = s.clone();
                        next.push(p);
                        Some(next)
                    }
                })
            })
            .collect();
    }
    seqs.into_iter().map(|slots| CircuitTemplate { slots }).collect()
}

/// Canonical classes of all templates of `length`, ordered by canonical form.
pub fn enumerate_templates(length: usize) -> Result<Vec<TemplateClass>> {
    if !(1..=MAX_TEMPLATE_LENGTH).contains(&length) {
        return Err(invalid(format!(
            "template length must be in 1..={MAX_TEMPLATE_LENGTH}, got {length}"
        )));
    }
    let mut classes: BTreeMap<CircuitTemplate, TemplateClass> = BTreeMap::new();
    for t in all_templates(length) {
        let (canonical, _) = t.canonical();
        classes.entry(canonical).or_insert_with(|| TemplateClass::of(&t));
    }
    Ok(classes.into_values().collect())
}
