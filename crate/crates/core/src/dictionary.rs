use std::collections::HashMap;

use crate::Value;

/// Bijective string <-> [`Value`] encoding with dense ids in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    ids: HashMap<String, Value>,
    strings: Vec<String>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, s: &str) -> Value {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = Value::try_from(self.strings.len()).expect("dictionary exhausted the value domain");
        self.strings.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }

    pub fn lookup(&self, s: &str) -> Option<Value> {
        self.ids.get(s).copied()
    }

    pub fn decode(&self, v: Value) -> Option<&str> {
        self.strings.get(v as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}
