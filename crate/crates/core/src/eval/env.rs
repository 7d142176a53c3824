use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::tensor::Variance;
use crate::value::Value;

type Key = (String, Option<Vec<Variance>>);

struct Frame {
    vars: RefCell<HashMap<Key, Value>>,
    parent: Option<Env>,
}

/// A chain of lexical frames. Bindings are keyed by name and optional
/// variance signature, so `g__` and `g~~` coexist.
#[derive(Clone)]
pub struct Env(Rc<Frame>);

impl Default for Env {
    fn default() -> Self {
        Self::new()
    }
}

impl Env {
    pub fn new() -> Self {
        Env(Rc::new(Frame {
            vars: RefCell::new(HashMap::new()),
            parent: None,
        }))
    }

    pub fn child(&self) -> Env {
        Env(Rc::new(Frame {
            vars: RefCell::new(HashMap::new()),
            parent: Some(self.clone()),
        }))
    }

    pub fn define(&self, name: &str, signature: Option<Vec<Variance>>, v: Value) {
        self.0.vars.borrow_mut().insert((name.to_string(), signature), v);
    }

    /// Innermost frame first; within a frame the exact signature wins over
    /// the plain name.
    pub fn lookup(&self, name: &str, signature: Option<&[Variance]>) -> Option<Value> {
        let mut frame = Some(self);
        while let Some(env) = frame {
            let vars = env.0.vars.borrow();
            if let Some(sig) = signature {
                if let Some(v) = vars.get(&(name.to_string(), Some(sig.to_vec()))) {
                    return Some(v.clone());
                }
            }
            if let Some(v) = vars.get(&(name.to_string(), None)) {
                return Some(v.clone());
            }
            frame = env.0.parent.as_ref();
        }
        None
    }

    /// Names bound in this frame only, sorted, with signatures spelled out.
    pub fn names(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .0
            .vars
            .borrow()
            .keys()
            .map(|(n, sig)| {
                let mut s = n.clone();
                for v in sig.iter().flatten() {
                    s.push_str(v.marker());
                }
                s
            })
            .collect();
        out.sort();
        out
    }
}
