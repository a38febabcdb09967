//! File formats: instance JSON and DIMACS graphs.

use serde::{Deserialize, Serialize};

use crate::classes::{ClassDescriptor, HypothesisClass};
use crate::data::{label01, DataDistribution, Dataset, Hypothesis, LabeledExample};
use crate::erm::ErmInstance;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::harness::PlantedInstance;

/// One support entry of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub point: usize,
    #[serde(with = "label01")]
    pub label: bool,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionFile {
    pub support: Vec<SupportEntry>,
}

/// The planted witness stored alongside generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFile {
    /// One 0/1 label vector per planted hypothesis.
    pub hypotheses: Vec<Vec<u8>>,
    /// 0-based index of the hypothesis labeling each distribution.
    pub assignment: Vec<usize>,
    pub noise: f64,
}

/// The instance JSON read by every subcommand that takes `--instance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub class: ClassDescriptor,
    /// Size of the instance space; must match the class.
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distributions: Vec<DistributionFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub datasets: Vec<Dataset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<PlantedFile>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("instance JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    /// The class, checked against `points`.
    pub fn class(&self) -> Result<HypothesisClass> {
        let class = HypothesisClass::from_descriptor(&self.class)?;
        if class.space().size() != self.points {
            return Err(Error::invalid(format!(
                "\"points\" is {} but the class has {} points",
                self.points,
                class.space().size()
            )));
        }
        Ok(class)
    }

    pub fn distributions(&self) -> Result<Vec<DataDistribution>> {
        self.distributions
            .iter()
            .map(|d| {
                DataDistribution::new(
                    d.support
                        .iter()
                        .map(|e| (LabeledExample::new(e.point, e.label), e.p))
                        .collect(),
                )
            })
            .collect()
    }

    /// The datasets with `k` as an augmented-ERM instance; `k` must be set
    /// here or in the file.
    pub fn erm_instance(&self, k: Option<usize>) -> Result<ErmInstance> {
        let k = k.or(self.k).ok_or_else(|| Error::invalid("k is neither given nor in the instance"))?;
        if self.datasets.is_empty() {
            return Err(Error::invalid("the instance has no datasets"));
        }
        ErmInstance::new(self.class()?, self.datasets.clone(), k)
    }

    pub fn from_planted(inst: &PlantedInstance) -> Self {
        InstanceFile {
            class: inst.class.descriptor(),
            points: inst.class.space().size(),
            k: Some(inst.k()),
            distributions: inst.distributions.iter().map(distribution_file).collect(),
            datasets: Vec::new(),
            planted: Some(PlantedFile {
                hypotheses: inst.hypotheses.iter().map(Hypothesis::to_labels).collect(),
                assignment: inst.assignment.clone(),
                noise: inst.max_noise(),
            }),
        }
    }

    pub fn from_erm(inst: &ErmInstance) -> Self {
        InstanceFile {
            class: inst.class.descriptor(),
            points: inst.class.space().size(),
            k: Some(inst.k),
            distributions: Vec::new(),
            datasets: inst.datasets.clone(),
            planted: None,
        }
    }
}

pub fn distribution_file(d: &DataDistribution) -> DistributionFile {
    DistributionFile {
        support: d
            .support()
            .iter()
            .map(|(e, p)| SupportEntry {
                point: e.point,
                label: e.label,
                p: *p,
            })
            .collect(),
    }
}

/// Parses DIMACS edge format: `c` comment lines, one `p edge <n> <m>` line,
/// then `m` lines `e <u> <v>` with 1-based vertices.
pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut graph: Option<(Graph, usize)> = None;
    let mut seen = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let bad = |msg: &str| Error::invalid(format!("DIMACS line {}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.first() {
            None | Some(&"c") => continue,
            Some(&"p") => {
                if graph.is_some() {
                    return Err(bad("second problem line"));
                }
                if fields.len() != 4 || !matches!(fields[1], "edge" | "col") {
                    return Err(bad("expected 'p edge <n> <m>'"));
                }
                let n = fields[2].parse().map_err(|_| bad("bad vertex count"))?;
                let m = fields[3].parse().map_err(|_| bad("bad edge count"))?;
                graph = Some((Graph::new(n), m));
            }
            Some(&"e") => {
                let (g, _) = graph.as_mut().ok_or_else(|| bad("edge before the problem line"))?;
                if fields.len() != 3 {
                    return Err(bad("expected 'e <u> <v>'"));
                }
                let u: usize = fields[1].parse().map_err(|_| bad("bad vertex"))?;
                let v: usize = fields[2].parse().map_err(|_| bad("bad vertex"))?;
                if u == 0 || v == 0 {
                    return Err(bad("vertices are 1-based"));
                }
                g.add_edge(u - 1, v - 1).map_err(|e| bad(&e.to_string()))?;
                seen += 1;
            }
            Some(other) => return Err(bad(&format!("unknown line type '{other}'"))),
        }
    }
    let (g, m) = graph.ok_or_else(|| Error::invalid("DIMACS input has no problem line"))?;
    if seen != m {
        return Err(Error::invalid(format!("DIMACS header declares {m} edges, found {seen}")));
    }
    Ok(g)
}

pub fn format_dimacs(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!("p edge {} {}\n", g.n(), edges.len());
    for (u, v) in edges {
        out.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_all_functions;
    use crate::harness::{generate_planted, PlantMode};
    use crate::rng::RngStream;

    #[test]
    fn dimacs_round_trip() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let text = format_dimacs(&g);
        assert_eq!(text, "p edge 4 3\ne 1 2\ne 2 3\ne 3 4\n");
        assert_eq!(parse_dimacs(&format!("c hi\n{text}")).unwrap().edges(), g.edges());
        assert!(parse_dimacs("p edge 2 1\ne 1 3\n").is_err());
        assert!(parse_dimacs("p edge 2 2\ne 1 2\n").is_err());
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("p edge 2 1\ne 0 1\n").is_err());
    }

    #[test]
    fn planted_instance_round_trip() {
        let f = make_all_functions(3).unwrap();
        let inst = generate_planted(&f, 3, 2, 0.05, PlantMode::IidMarginals, RngStream::root(1)).unwrap();
        let file = InstanceFile::from_planted(&inst);
        let back = InstanceFile::parse(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.distributions().unwrap(), inst.distributions);
        assert_eq!(back.class().unwrap(), f);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(InstanceFile::parse(r#"{"class":{"kind":"all_functions","d":2},"points":3}"#)
            .unwrap()
            .class()
            .is_err());
        assert!(InstanceFile::parse(r#"{"class":{"kind":"nope"},"points":3}"#).is_err());
        let f = InstanceFile::parse(
            r#"{"class":{"kind":"all_functions","d":2},"points":2,"datasets":[[{"point":0,"label":1}]]}"#,
        )
        .unwrap();
        assert!(f.erm_instance(None).is_err());
        assert_eq!(f.erm_instance(Some(1)).unwrap().n(), 1);
    }
}
