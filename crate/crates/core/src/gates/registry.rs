//! Runtime lookup of gates by name.
//!
//! Grammar accepted by [`GateRegistry::resolve`]:
//!
//! ```text
//! spec    := name [":" arg] ["-on-" pair]
//! pair    := AB | BC | AC
//! ```
//!
//! `cnot-on-AB` embeds the 4×4 `cnot` into the three-qubit space on `AB`;
//! `deutsch:1.5708` passes `1.5708` (radians) to the `deutsch` factory.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::gates::{self, PairLabel};
use crate::matrix::ComplexMatrix;

/// A named constructor for a gate, optionally taking one argument.
pub trait GateFactory: Send + Sync {
    fn name(&self) -> &str;

    fn summary(&self) -> &str;

    fn build(&self, arg: Option<&str>) -> Result<ComplexMatrix>;
}

struct Fixed {
    name: &'static str,
    summary: &'static str,
    build: fn() -> ComplexMatrix,
}

impl GateFactory for Fixed {
    fn name(&self) -> &str {
        self.name
    }

    fn summary(&self) -> &str {
        self.summary
    }

    fn build(&self, arg: Option<&str>) -> Result<ComplexMatrix> {
        match arg {
            None => Ok((self.build)()),
            Some(a) => Err(invalid(format!("gate `{}` takes no argument (got `{a}`)", self.name))),
        }
    }
}

struct Deutsch;

impl GateFactory for Deutsch {
    fn name(&self) -> &str {
        "deutsch"
    }

    fn summary(&self) -> &str {
        "three-qubit controlled phase I - (1 - e^{i theta})|111><111|; deutsch:<theta radians>"
    }

    fn build(&self, arg: Option<&str>) -> Result<ComplexMatrix> {
        let arg = arg.ok_or_else(|| invalid("deutsch needs an angle, e.g. deutsch:1.5708"))?;
        let theta: f64 = arg
            .trim()
            .parse()
            .map_err(|_| invalid(format!("`{arg}` is not a decimal angle")))?;
        if !theta.is_finite() {
            return Err(invalid("angle must be finite"));
        }
        Ok(gates::deutsch(theta))
    }
}

struct Identity;

impl GateFactory for Identity {
    fn name(&self) -> &str {
        "identity"
    }

    fn summary(&self) -> &str {
        "identity; identity:<dim> (default 8)"
    }

    fn build(&self, arg: Option<&str>) -> Result<ComplexMatrix> {
        let dim = match arg {
            None => 8,
            Some(a) => a
                .trim()
                .parse()
                .map_err(|_| invalid(format!("`{a}` is not a dimension")))?,
        };
        if !matches!(dim, 2 | 4 | 8) {
            return Err(invalid(format!("identity dimension must be 2, 4 or 8, got {dim}")));
        }
        Ok(ComplexMatrix::identity(dim))
    }
}

/// Name → factory table.
pub struct GateRegistry {
    factories: BTreeMap<String, Box<dyn GateFactory>>,
}

impl GateRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding every built-in gate.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        let fixed: [(&'static str, &'static str, fn() -> ComplexMatrix); 8] = [
            ("toffoli", "Toffoli gate, controls A and B, target C", gates::toffoli),
            ("v_abc", "I - 2|111><111| (Toffoli up to H on C)", gates::v_abc),
            ("h", "Hadamard", gates::hadamard),
            ("x", "Pauli X (NOT)", gates::pauli_x),
            ("z", "Pauli Z", gates::pauli_z),
            ("cnot", "CNOT, control on the first qubit", gates::cnot),
            ("cz", "controlled-Z", gates::cz),
            ("swap", "two-qubit swap", gates::swap),
        ];
        for (name, summary, build) in fixed {
            r.register(Box::new(Fixed { name, summary, build }))
                .expect("built-in names are distinct");
        }
        r.register(Box::new(Deutsch)).expect("distinct");
        r.register(Box::new(Identity)).expect("distinct");
        r
    }

    pub fn register(&mut self, factory: Box<dyn GateFactory>) -> Result<()> {
        let name = factory.name().to_ascii_lowercase();
        if self.factories.contains_key(&name) {
            return Err(invalid(format!("gate `{name}` is already registered")));
        }
        self.factories.insert(name, factory);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, &str)> {
        self.factories.iter().map(|(k, f)| (k.as_str(), f.summary()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(&name.to_ascii_lowercase())
    }

    /// Resolves a gate spec; unknown names give [`Error::UnknownName`].
    pub fn resolve(&self, spec: &str) -> Result<ComplexMatrix> {
        let spec = spec.trim();
        let lower = spec.to_ascii_lowercase();
        if let Some(pos) = lower.rfind("-on-") {
            let pair: PairLabel = spec[pos + 4..].parse()?;
            let g = self.resolve(&spec[..pos])?;
            if g.dim() != 4 {
                return Err(invalid(format!("`{}` is not a two-qubit gate", &spec[..pos])));
            }
            return gates::embed_pair(pair, &g);
        }
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let factory = self
            .factories
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownName(name.to_string()))?;
        factory.build(arg)
    }
}

impl Default for GateRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

/// Resolves against the built-in registry.
pub fn resolve(spec: &str) -> Result<ComplexMatrix> {
    GateRegistry::with_builtin().resolve(spec)
}
