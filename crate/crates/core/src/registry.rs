//! Name-keyed registries of interchangeable strategies.
//!
//! Resampling schemes, prediction rules and image metrics are each a small
//! trait; concrete implementations are registered under a stable name and
//! looked up at runtime from configuration or command-line flags.

use std::collections::BTreeMap;

use crate::error::{Result, SmspError};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Box<T>>,
    order: Vec<String>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    /// Registers `item` under `name`, replacing any earlier entry of that name.
    pub fn register(&mut self, name: impl Into<String>, item: Box<T>) -> &mut Self {
        let name = name.into();
        if self.entries.insert(name.clone(), item).is_none() {
            self.order.push(name);
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| SmspError::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.order.join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Names in registration order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    /// Entries in registration order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.order
            .iter()
            .map(move |n| (n.as_str(), self.entries[n].as_ref()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
