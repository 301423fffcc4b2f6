//! Plain-text instance format.
//!
//! ```text
//! [meta]
//! name <name>
//! periods <T>
//! module_size <phi>
//! vertices <v1> <v2> ...
//! [edges]
//! <id> <u> <v> <module_cost> <module_capacity> <cost_1> ... <cost_T>
//! [demands]
//! <id> <source> <target> <base> <d_1> ... <d_T>
//! [paths]
//! <commodity_id> <edge_id> <edge_id> ...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Floats are written in
//! round-trip exponent form.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BaseNetwork, Commodity, Edge, Instance};
use crate::error::{Error, Result};

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_instance(inst: &Instance) -> String {
    let net = &inst.network;
    let mut s = String::new();
    let name = if inst.name.is_empty() { "unnamed" } else { &inst.name };
    writeln!(s, "[meta]").unwrap();
    writeln!(s, "name {}", name.replace(char::is_whitespace, "_")).unwrap();
    writeln!(s, "periods {}", inst.periods).unwrap();
    writeln!(s, "module_size {}", f(inst.module_size)).unwrap();
    writeln!(s, "vertices {}", net.vertices.join(" ")).unwrap();
    writeln!(s, "[edges]").unwrap();
    for (e, edge) in net.edges.iter().enumerate() {
        write!(
            s,
            "{} {} {} {} {}",
            edge.id,
            net.vertices[edge.endpoints.0],
            net.vertices[edge.endpoints.1],
            f(edge.module_cost),
            f(edge.module_capacity)
        )
        .unwrap();
        for g in &inst.cost[e] {
            write!(s, " {}", f(*g)).unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "[demands]").unwrap();
    for (c, com) in net.commodities.iter().enumerate() {
        write!(
            s,
            "{} {} {} {}",
            com.id,
            net.vertices[com.source],
            net.vertices[com.target],
            f(com.demand)
        )
        .unwrap();
        for d in &inst.demand[c] {
            write!(s, " {}", f(*d)).unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "[paths]").unwrap();
    for (c, set) in inst.paths.iter().enumerate() {
        for path in set {
            write!(s, "{}", net.commodities[c].id).unwrap();
            for &e in path {
                write!(s, " {}", net.edges[e].id).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

fn num(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid number `{tok}`")))
}

/// Parses the native format and validates the result.
pub fn read_instance(text: &str) -> Result<Instance> {
    let mut name = String::new();
    let mut periods: Option<usize> = None;
    let mut module_size: Option<f64> = None;
    let mut net = BaseNetwork::default();
    let mut vix: HashMap<String, usize> = HashMap::new();
    let mut eix: HashMap<String, usize> = HashMap::new();
    let mut cix: HashMap<String, usize> = HashMap::new();
    let mut cost = Vec::new();
    let mut demand = Vec::new();
    let mut paths: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut section = "";

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[meta]" => "meta",
                "[edges]" => "edges",
                "[demands]" => "demands",
                "[paths]" => "paths",
                _ => return Err(Error::parse(line, format!("unknown section `{content}`"))),
            };
            if section != "meta" && (periods.is_none() || module_size.is_none()) {
                return Err(Error::parse(line, "periods and module_size must precede data sections"));
            }
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match section {
            "meta" => match toks[0] {
                "name" => name = toks[1..].join(" "),
                "periods" => {
                    let t = toks
                        .get(1)
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(line, "invalid periods"))?;
                    periods = Some(t);
                }
                "module_size" => {
                    let tok = toks.get(1).ok_or_else(|| Error::parse(line, "missing module_size"))?;
                    module_size = Some(num(tok, line)?);
                }
                "vertices" => {
                    for v in &toks[1..] {
                        if vix.insert(v.to_string(), net.vertices.len()).is_some() {
                            return Err(Error::parse(line, format!("duplicate vertex `{v}`")));
                        }
                        net.vertices.push(v.to_string());
                    }
                }
                k => return Err(Error::parse(line, format!("unknown meta key `{k}`"))),
            },
            "edges" | "demands" => {
                let t = periods.unwrap_or(0);
                if toks.len() != 5 + t - usize::from(section == "demands") {
                    return Err(Error::parse(line, format!("expected {} fields", 5 + t)));
                }
                let lookup = |v: &str| {
                    vix.get(v)
                        .copied()
                        .ok_or_else(|| Error::parse(line, format!("unknown vertex `{v}`")))
                };
                let (a, b) = (lookup(toks[1])?, lookup(toks[2])?);
                let id = toks[0].to_string();
                if section == "edges" {
                    if eix.insert(id.clone(), net.edges.len()).is_some() {
                        return Err(Error::parse(line, format!("duplicate edge `{id}`")));
                    }
                    net.edges.push(Edge {
                        id,
                        endpoints: (a, b),
                        module_cost: num(toks[3], line)?,
                        module_capacity: num(toks[4], line)?,
                    });
                    cost.push(toks[5..].iter().map(|x| num(x, line)).collect::<Result<Vec<_>>>()?);
                } else {
                    if cix.insert(id.clone(), net.commodities.len()).is_some() {
                        return Err(Error::parse(line, format!("duplicate commodity `{id}`")));
                    }
                    net.commodities.push(Commodity {
                        id,
                        source: a,
                        target: b,
                        demand: num(toks[3], line)?,
                    });
                    demand.push(toks[4..].iter().map(|x| num(x, line)).collect::<Result<Vec<_>>>()?);
                    paths.push(Vec::new());
                }
            }
            "paths" => {
                let c = *cix
                    .get(toks[0])
                    .ok_or_else(|| Error::parse(line, format!("unknown commodity `{}`", toks[0])))?;
                let path = toks[1..]
                    .iter()
                    .map(|e| {
                        eix.get(*e)
                            .copied()
                            .ok_or_else(|| Error::parse(line, format!("unknown edge `{e}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                paths[c].push(path);
            }
            _ => return Err(Error::parse(line, "data outside of a section")),
        }
    }

    let inst = Instance {
        name,
        network: net,
        periods: periods.ok_or_else(|| Error::parse(text.lines().count(), "missing periods"))?,
        demand,
        cost,
        module_size: module_size.ok_or_else(|| Error::parse(text.lines().count(), "missing module_size"))?,
        paths,
    };
    if let Some(c) = inst.paths.iter().position(Vec::is_empty) {
        return Err(Error::EmptyPathSet(inst.network.commodities[c].id.clone()));
    }
    let problems = inst.validate();
    if !problems.is_empty() {
        return Err(Error::Validation(problems.join("; ")));
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{expand_multiperiod, GrowthConfig};
    use proptest::prelude::*;

    fn grid() -> BaseNetwork {
        let mut net = BaseNetwork {
            vertices: (0..4).map(|v| format!("n{v}")).collect(),
            ..Default::default()
        };
        for (i, (a, b, c)) in [(0, 1, 2.0), (1, 3, 1.5), (0, 2, 1.0), (2, 3, 4.0), (1, 2, 0.5)]
            .into_iter()
            .enumerate()
        {
            net.edges.push(Edge {
                id: format!("e{i}"),
                endpoints: (a, b),
                module_cost: c,
                module_capacity: 8.0,
            });
        }
        for (id, s, t, d) in [("d03", 0, 3, 3.3), ("d12", 1, 2, 1.0 / 3.0)] {
            net.commodities.push(Commodity {
                id: id.into(),
                source: s,
                target: t,
                demand: d,
            });
        }
        net
    }

    #[test]
    fn empty_path_set_is_named() {
        let inst = expand_multiperiod(&grid(), &GrowthConfig::default()).unwrap();
        let text = write_instance(&inst);
        let cut: String = text
            .lines()
            .filter(|l| !l.starts_with("d12 e"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(read_instance(&cut), Err(Error::EmptyPathSet("d12".into())));
    }

    #[test]
    fn decreasing_demand_fails_validation() {
        let mut inst = expand_multiperiod(&grid(), &GrowthConfig::default()).unwrap();
        inst.demand[0][2] = 0.1;
        match read_instance(&write_instance(&inst)) {
            Err(Error::Validation(msg)) => assert!(msg.contains("demand decreasing: d03, t=3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_edge_is_a_parse_error() {
        let inst = expand_multiperiod(&grid(), &GrowthConfig::default()).unwrap();
        let text = write_instance(&inst).replace("d03 e0", "d03 e9");
        assert!(matches!(read_instance(&text), Err(Error::Parse { .. })));
    }

    proptest! {
        #[test]
        fn write_read_round_trip(
            seed in any::<u64>(),
            periods in 1usize..6,
            growth in 1.0f64..2.0,
            discount in 0.1f64..=1.0,
            jitter in 0.0f64..0.9,
            k in 1usize..5,
        ) {
            let cfg = GrowthConfig {
                periods,
                demand_growth: growth,
                cost_discount: discount,
                paths_per_commodity: k,
                jitter,
                seed,
                module_size: None,
            };
            let mut inst = expand_multiperiod(&grid(), &cfg).unwrap();
            inst.name = "grid".into();
            let back = read_instance(&write_instance(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
