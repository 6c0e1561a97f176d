//! Network definition files.
//!
//! A network is a list of sites, optional on-site energies, couplings between
//! site pairs and an ordered list of connector unitaries applied afterwards.
//! Site labels in the file start at 1.
//!
//! ```toml
//! sites = 6
//!
//! [[coupling]]
//! sites = [1, 2]
//! value = 1.0
//!
//! # ... remaining couplings ...
//!
//! [[connector]]
//! kind = "hadamard"
//! sites = [3, 6]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::network::{hadamard_connector, NetworkHamiltonian};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub sites: usize,
    /// On-site energies, one per site; empty means all zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub onsite: Vec<f64>,
    #[serde(default, rename = "coupling", skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingSpec>,
    #[serde(default, rename = "connector", skip_serializing_if = "Vec::is_empty")]
    pub connectors: Vec<ConnectorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub sites: [usize; 2],
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectorKind {
    #[default]
    Hadamard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectorSpec {
    #[serde(default)]
    pub kind: ConnectorKind,
    pub sites: [usize; 2],
}

impl NetworkConfig {
    /// Two uniform trimers joined by a Hadamard connector on sites 3 and 6.
    pub fn designed(j: f64) -> Self {
        let couplings = [[1, 2], [2, 3], [4, 5], [5, 6]]
            .into_iter()
            .map(|sites| CouplingSpec { sites, value: j })
            .collect();
        Self {
            sites: 6,
            onsite: Vec::new(),
            couplings,
            connectors: vec![ConnectorSpec {
                kind: ConnectorKind::Hadamard,
                sites: [3, 6],
            }],
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn site(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.sites {
            return Err(Error::Config(format!(
                "site {label} is outside 1..={}",
                self.sites
            )));
        }
        Ok(label - 1)
    }

    pub fn build(&self) -> Result<NetworkHamiltonian> {
        if self.sites < 2 {
            return Err(Error::Config(format!(
                "need at least 2 sites, got {}",
                self.sites
            )));
        }
        if !self.onsite.is_empty() && self.onsite.len() != self.sites {
            return Err(Error::Config(format!(
                "onsite has {} entries for {} sites",
                self.onsite.len(),
                self.sites
            )));
        }
        let n = self.sites;
        let mut m = ComplexMatrix::zeros(n);
        for (i, &e) in self.onsite.iter().enumerate() {
            m[(i, i)] = C64::new(e, 0.0);
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.couplings {
            let (a, b) = (self.site(c.sites[0])?, self.site(c.sites[1])?);
            if a == b {
                return Err(Error::Config(format!(
                    "coupling of site {} to itself",
                    a + 1
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Config(format!(
                    "duplicate coupling between sites {} and {}",
                    a + 1,
                    b + 1
                )));
            }
            m[(a, b)] = C64::new(c.value, 0.0);
            m[(b, a)] = C64::new(c.value, 0.0);
        }
        let m = ComplexMatrix::new(n, m.entries().to_vec())?;
        let mut network = NetworkHamiltonian::from_operator(HermitianOperator::new(m)?);
        for c in &self.connectors {
            let pair = (self.site(c.sites[0])?, self.site(c.sites[1])?);
            let u = match c.kind {
                ConnectorKind::Hadamard => hadamard_connector(n, pair)?,
            };
            network = network.connect(&u)?;
        }
        Ok(network)
    }
}
