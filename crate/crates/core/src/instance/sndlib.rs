//! Reader for the SNDlib native ASCII network format.
//!
//! Only the `NODES`, `LINKS` and `DEMANDS` sections are interpreted. Other
//! sections (`META`, `ADMISSIBLE_PATHS`, ...) are skipped. Pre-installed
//! capacities are ignored; when a link lists several modules the first one
//! provides the module capacity and cost.

use std::collections::HashMap;

use super::{BaseNetwork, Commodity, Edge};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Nodes,
    Links,
    Demands,
    Other,
}

/// Splits a record into tokens, treating parentheses as separate tokens.
fn tokens(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in line.split_whitespace() {
        let mut rest = word;
        while !rest.is_empty() {
            if let Some(stripped) = rest.strip_prefix('(') {
                out.push("(");
                rest = stripped;
                continue;
            }
            if let Some(stripped) = rest.strip_prefix(')') {
                out.push(")");
                rest = stripped;
                continue;
            }
            let end = rest.find(['(', ')']).unwrap_or(rest.len());
            out.push(&rest[..end]);
            rest = &rest[end..];
        }
    }
    out
}

fn number(tok: Option<&&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

fn expect(tok: Option<&&str>, want: &str, line: usize) -> Result<()> {
    match tok {
        Some(t) if *t == want => Ok(()),
        Some(t) => Err(Error::parse(line, format!("expected `{want}`, found `{t}`"))),
        None => Err(Error::parse(line, format!("expected `{want}`"))),
    }
}

/// `id ( a b )` prefix shared by links and demands.
fn endpoints<'a>(toks: &[&'a str], line: usize) -> Result<(&'a str, &'a str, &'a str)> {
    let id = toks[0];
    expect(toks.get(1), "(", line)?;
    let a = toks
        .get(2)
        .copied()
        .filter(|t| *t != ")")
        .ok_or_else(|| Error::parse(line, format!("missing endpoint in `{id}`")))?;
    let b = toks
        .get(3)
        .copied()
        .filter(|t| *t != ")")
        .ok_or_else(|| Error::parse(line, format!("missing endpoint in `{id}`")))?;
    expect(toks.get(4), ")", line)?;
    Ok((id, a, b))
}

pub fn parse_sndlib(text: &str) -> Result<BaseNetwork> {
    let mut net = BaseNetwork::default();
    let mut node_ix: HashMap<String, usize> = HashMap::new();
    let mut link_ids: HashMap<String, usize> = HashMap::new();
    let mut demand_ids: HashMap<String, usize> = HashMap::new();
    let mut seen_nodes = false;
    let mut seen_links = false;
    let mut seen_demands = false;
    let mut section: Option<Section> = None;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() || content.starts_with('?') {
            continue;
        }
        let toks = tokens(content);
        match section {
            None => {
                if toks.len() != 2 || toks[1] != "(" {
                    return Err(Error::parse(line, format!("expected section header, found `{content}`")));
                }
                let s = match toks[0] {
                    "NODES" => {
                        seen_nodes = true;
                        Section::Nodes
                    }
                    "LINKS" => {
                        if !seen_nodes {
                            return Err(Error::parse(line, "LINKS section before NODES section"));
                        }
                        seen_links = true;
                        Section::Links
                    }
                    "DEMANDS" => {
                        if !seen_nodes {
                            return Err(Error::parse(line, "DEMANDS section before NODES section"));
                        }
                        seen_demands = true;
                        Section::Demands
                    }
                    _ => Section::Other,
                };
                section = Some(s);
            }
            Some(_) if toks == [")"] => section = None,
            Some(Section::Other) => {}
            Some(Section::Nodes) => {
                let id = toks[0];
                if id == "(" || id == ")" {
                    return Err(Error::parse(line, "node record without id"));
                }
                if node_ix.contains_key(id) {
                    return Err(Error::parse(line, format!("duplicate node id `{id}`")));
                }
                node_ix.insert(id.to_string(), net.vertices.len());
                net.vertices.push(id.to_string());
            }
            Some(Section::Links) => {
                let (id, a, b) = endpoints(&toks, line)?;
                if link_ids.contains_key(id) {
                    return Err(Error::parse(line, format!("duplicate link id `{id}`")));
                }
                let ea = *node_ix
                    .get(a)
                    .ok_or_else(|| Error::parse(line, format!("link `{id}`: unknown node `{a}`")))?;
                let eb = *node_ix
                    .get(b)
                    .ok_or_else(|| Error::parse(line, format!("link `{id}`: unknown node `{b}`")))?;
                if ea == eb {
                    return Err(Error::parse(line, format!("link `{id}` is a self-loop")));
                }
                // pre-installed capacity, its cost, routing cost, setup cost
                for (k, what) in ["pre-installed capacity", "pre-installed cost", "routing cost", "setup cost"]
                    .iter()
                    .enumerate()
                {
                    number(toks.get(5 + k), line, what)?;
                }
                expect(toks.get(9), "(", line)?;
                let modules = &toks[10..];
                let close = modules
                    .iter()
                    .position(|t| *t == ")")
                    .ok_or_else(|| Error::parse(line, format!("link `{id}`: unterminated module list")))?;
                let modules = &modules[..close];
                if !modules.len().is_multiple_of(2) {
                    return Err(Error::parse(line, format!("link `{id}`: odd module list")));
                }
                if modules.is_empty() {
                    return Err(Error::parse(line, format!("link `{id}` lists no capacity module")));
                }
                let capacity = number(modules.first(), line, "module capacity")?;
                let cost = number(modules.get(1), line, "module cost")?;
                if capacity <= 0.0 || cost <= 0.0 {
                    return Err(Error::parse(line, format!("link `{id}`: module capacity and cost must be positive")));
                }
                for pair in modules.chunks(2).skip(1) {
                    number(pair.first(), line, "module capacity")?;
                    number(pair.get(1), line, "module cost")?;
                }
                link_ids.insert(id.to_string(), net.edges.len());
                net.edges.push(Edge {
                    id: id.to_string(),
                    endpoints: (ea, eb),
                    module_cost: cost,
                    module_capacity: capacity,
                });
            }
            Some(Section::Demands) => {
                let (id, a, b) = endpoints(&toks, line)?;
                if demand_ids.contains_key(id) {
                    return Err(Error::parse(line, format!("duplicate demand id `{id}`")));
                }
                let s = *node_ix
                    .get(a)
                    .ok_or_else(|| Error::parse(line, format!("demand `{id}`: unknown node `{a}`")))?;
                let t = *node_ix
                    .get(b)
                    .ok_or_else(|| Error::parse(line, format!("demand `{id}`: unknown node `{b}`")))?;
                number(toks.get(5), line, "routing unit")?;
                let value = number(toks.get(6), line, "demand value")?;
                demand_ids.insert(id.to_string(), net.commodities.len());
                net.commodities.push(Commodity {
                    id: id.to_string(),
                    source: s,
                    target: t,
                    demand: value,
                });
            }
        }
    }

    if section.is_some() {
        return Err(Error::parse(last_line, "unterminated section"));
    }
    if !seen_nodes {
        return Err(Error::parse(last_line, "missing NODES section"));
    }
    if !seen_links {
        return Err(Error::parse(last_line, "missing LINKS section"));
    }
    if !seen_demands {
        return Err(Error::parse(last_line, "missing DEMANDS section"));
    }
    if net.commodities.is_empty() {
        return Err(Error::Validation("network has no demands".into()));
    }
    if let Some(c) = net.commodities.iter().find(|c| !(c.demand > 0.0)) {
        return Err(Error::Validation(format!("demand `{}` is not positive", c.id)));
    }
    if let Some(c) = net.commodities.iter().find(|c| c.source == c.target) {
        return Err(Error::Validation(format!("demand `{}` has identical endpoints", c.id)));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "?SNDlib native format; type: network; version: 1.0
# network tiny

META (
  granularity = 1year
)

NODES (
  A ( 1.00 2.00 )
  B ( 3.00 4.00 )
  C ( 5.00 6.00 )
)

LINKS (
  L1 ( A B ) 0.00 0.00 0.00 0.00 ( 40.00 10.00 160.00 30.00 )
  L2 ( B C ) 5.00 1.00 0.00 0.00 ( 40.00 7.50 )
)

DEMANDS (
  D1 ( A C ) 1 12.00 UNLIMITED
)

ADMISSIBLE_PATHS (
  D1 ( P_0 ( L1 L2 ) )
)
";

    #[test]
    fn parses_sections_and_takes_first_module() {
        let net = parse_sndlib(SMALL).unwrap();
        assert_eq!(net.vertices, vec!["A", "B", "C"]);
        assert_eq!(net.edges.len(), 2);
        assert_eq!(net.edges[0].module_capacity, 40.0);
        assert_eq!(net.edges[0].module_cost, 10.0);
        assert_eq!(net.edges[1].module_cost, 7.5);
        assert_eq!(net.edges[1].endpoints, (1, 2));
        assert_eq!(net.commodities.len(), 1);
        assert_eq!(net.commodities[0].demand, 12.0);
        assert_eq!((net.commodities[0].source, net.commodities[0].target), (0, 2));
    }

    #[test]
    fn empty_input_reports_missing_nodes() {
        let err = parse_sndlib("").unwrap_err();
        assert!(err.to_string().contains("missing NODES section"), "{err}");
    }

    #[test]
    fn unknown_endpoint_names_line() {
        let text = SMALL.replace("L2 ( B C )", "L2 ( B Z )");
        match parse_sndlib(&text).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 16);
                assert!(message.contains("unknown node `Z`"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = SMALL.replace("  C ( 5.00 6.00 )", "  B ( 5.00 6.00 )");
        assert!(matches!(parse_sndlib(&text), Err(Error::Parse { line: 11, .. })));
        let text = SMALL.replace("L2 ( B C )", "L1 ( B C )");
        assert!(matches!(parse_sndlib(&text), Err(Error::Parse { line: 16, .. })));
    }

    #[test]
    fn zero_demands_fail_validation() {
        let text = SMALL.replace("  D1 ( A C ) 1 12.00 UNLIMITED\n", "");
        assert!(matches!(parse_sndlib(&text), Err(Error::Validation(_))));
        let text = SMALL.replace("12.00", "0.00");
        assert!(matches!(parse_sndlib(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_records_are_parse_errors() {
        let text = SMALL.replace("( 40.00 7.50 )", "( 40.00 )");
        assert!(matches!(parse_sndlib(&text), Err(Error::Parse { line: 16, .. })));
        let text = SMALL.replace("NODES (", "NODES");
        assert!(matches!(parse_sndlib(&text), Err(Error::Parse { line: 8, .. })));
    }
}
