use crate::error::{Error, Result};

/// Children lists and a preorder for a parent array, with the root found and
/// acyclicity checked.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Topology {
    pub root: usize,
    pub children: Vec<Vec<usize>>,
    pub preorder: Vec<usize>,
}

pub(crate) fn topology(parent: &[Option<usize>]) -> Result<Topology> {
    let n = parent.len();
    if n == 0 {
        return Err(Error::validation(
            None,
            "tree must have at least one vertex",
        ));
    }
    let mut root = None;
    let mut children = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        match *p {
            None => {
                if let Some(r) = root {
                    return Err(Error::validation(
                        v,
                        format!("second root (first root is {r})"),
                    ));
                }
                root = Some(v);
            }
            Some(p) if p >= n => {
                return Err(Error::validation(v, format!("parent {p} out of range")));
            }
            Some(p) if p == v => return Err(Error::validation(v, "vertex is its own parent")),
            Some(p) => children[p].push(v),
        }
    }
    let Some(root) = root else {
        return Err(Error::validation(
            None,
            "no root: every vertex has a parent (cycle)",
        ));
    };

    let mut preorder = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        preorder.push(v);
        stack.extend(children[v].iter().rev());
    }
    if preorder.len() < n {
        let mut seen = vec![false; n];
        for &v in &preorder {
            seen[v] = true;
        }
        let bad = seen.iter().position(|s| !s).expect("some vertex unreached");
        return Err(Error::validation(bad, "cycle in parent links"));
    }
    Ok(Topology {
        root,
        children,
        preorder,
    })
}
