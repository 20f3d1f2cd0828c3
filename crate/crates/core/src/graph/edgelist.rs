use super::{Edge, Graph, GraphBuilder, GraphError, Result};

/// Parses `head<TAB>tail[<TAB>relation]` lines; `#` starts a comment. The node
/// count is one past the largest endpoint; relations, when present on every
/// edge, give a vocabulary of one past the largest relation index.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_node = None;
    let mut max_rel = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!(
                    "expected 2 or 3 tab-separated fields, found {}",
                    fields.len()
                ),
            });
        }
        let num = |s: &str| {
            s.parse::<usize>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("`{s}` is not a non-negative integer"),
            })
        };
        let (h, t) = (num(fields[0])?, num(fields[1])?);
        let r = fields.get(2).map(|s| num(s)).transpose()?;
        max_node = max_node.max(Some(h.max(t)));
        if let Some(r) = r {
            max_rel = max_rel.max(Some(r));
        }
        edges.push(Edge {
            head: h,
            tail: t,
            relation: r,
        });
    }
    let typed = edges.iter().filter(|e| e.relation.is_some()).count();
    if typed != 0 && typed != edges.len() {
        return Err(GraphError::Parse {
            line: 0,
            message: "either every edge has a relation or none does".into(),
        });
    }
    let mut b = GraphBuilder::new(max_node.map_or(0, |m| m + 1)).edges(edges);
    if let Some(r) = max_rel {
        b = b.relations(r + 1);
    }
    b.build()
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        match e.relation {
            Some(r) => out.push_str(&format!("{}\t{}\t{}\n", e.head, e.tail, r)),
            None => out.push_str(&format!("{}\t{}\n", e.head, e.tail)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_relations() {
        let g = parse_edge_list("# triangle\n0\t1\t0\n1\t2\t1 # typed\n\n2\t0\t1\n").unwrap();
        assert_eq!(
            (g.num_nodes(), g.num_edges(), g.num_relations()),
            (3, 3, Some(2))
        );
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            parse_edge_list("0\tx\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(parse_edge_list("0\t1\t0\n1\t2\n").is_err());
        assert_eq!(parse_edge_list("").unwrap().num_nodes(), 0);
    }
}
