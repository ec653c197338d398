use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRecord {
    pub at: NodeId,
    pub visited: Vec<NodeId>,
    /// One `A`/`T`/`U` symbol per stochastic edge.
    pub info: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub goto: NodeId,
    /// Targets visited on the way to `goto`, in order.
    pub via: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disambiguate: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcomes {
    pub traversable: Box<PolicyNode>,
    pub untraversable: Box<PolicyNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicyNode {
    Or {
        state: StateRecord,
        action: ActionRecord,
        cost_m: f64,
        next: Box<PolicyNode>,
        f_m: f64,
    },
    And {
        state: StateRecord,
        edge: usize,
        block_prob: f64,
        outcomes: Outcomes,
        f_m: f64,
    },
    Leaf {
        state: StateRecord,
        f_m: f64,
    },
    /// Cut off by the search budget.
    Open {
        state: StateRecord,
        f_m: f64,
    },
}

impl PolicyNode {
    pub fn state(&self) -> &StateRecord {
        match self {
            PolicyNode::Or { state, .. }
            | PolicyNode::And { state, .. }
            | PolicyNode::Leaf { state, .. }
            | PolicyNode::Open { state, .. } => state,
        }
    }

    pub fn f_m(&self) -> f64 {
        match self {
            PolicyNode::Or { f_m, .. }
            | PolicyNode::And { f_m, .. }
            | PolicyNode::Leaf { f_m, .. }
            | PolicyNode::Open { f_m, .. } => *f_m,
        }
    }

    /// Number of nodes in the subtree.
    pub fn size(&self) -> usize {
        match self {
            PolicyNode::Or { next, .. } => 1 + next.size(),
            PolicyNode::And { outcomes, .. } => 1 + outcomes.traversable.size() + outcomes.untraversable.size(),
            PolicyNode::Leaf { .. } | PolicyNode::Open { .. } => 1,
        }
    }

    pub fn has_open(&self) -> bool {
        match self {
            PolicyNode::Or { next, .. } => next.has_open(),
            PolicyNode::And { outcomes, .. } => outcomes.traversable.has_open() || outcomes.untraversable.has_open(),
            PolicyNode::Leaf { .. } => false,
            PolicyNode::Open { .. } => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub expected_cost_m: f64,
    pub optimal: bool,
    pub root: PolicyNode,
}

impl Policy {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy serializes")
    }

    pub fn to_json_with_meta(&self, meta: serde_json::Value) -> String {
        let mut v = serde_json::to_value(self).expect("policy serializes");
        v.as_object_mut().expect("object").insert("meta".into(), meta);
        serde_json::to_string_pretty(&v).expect("policy serializes")
    }

    /// Unknown top-level fields such as `meta` are ignored.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> StateRecord {
        StateRecord { at: 0, visited: vec![], info: "A".into() }
    }

    #[test]
    fn json_round_trip_and_field_order() {
        let p = Policy {
            expected_cost_m: 3.5,
            optimal: true,
            root: PolicyNode::Or {
                state: state(),
                action: ActionRecord { goto: 1, via: vec![], disambiguate: Some(0) },
                cost_m: 1.0,
                next: Box::new(PolicyNode::And {
                    state: state(),
                    edge: 0,
                    block_prob: 0.5,
                    outcomes: Outcomes {
                        traversable: Box::new(PolicyNode::Leaf { state: state(), f_m: 0.0 }),
                        untraversable: Box::new(PolicyNode::Leaf { state: state(), f_m: 0.0 }),
                    },
                    f_m: 2.5,
                }),
                f_m: 3.5,
            },
        };
        let text = p.to_json();
        assert!(text.find("\"kind\"").unwrap() < text.find("\"state\"").unwrap());
        assert_eq!(Policy::from_json(&text).unwrap(), p);
        let with_meta = p.to_json_with_meta(serde_json::json!({"tool": "x"}));
        assert_eq!(Policy::from_json(&with_meta).unwrap(), p);
        assert_eq!(p.root.size(), 4);
        assert!(!p.root.has_open());
    }

    #[test]
    fn terminal_action_omits_disambiguate() {
        let a = ActionRecord { goto: 0, via: vec![2, 1], disambiguate: None };
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"goto":0,"via":[2,1]}"#);
    }
}
