//! Canonical event records and the event-kind catalog.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Timestamp;

/// Group label given to log ids missing from the catalog (lenient parsing only).
pub const UNKNOWN_GROUP: &str = "unknown";

/// Event-kind code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogId(pub u16);

/// One parsed log line. `None` marks an absent field, distinct from zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub account_id: String,
    pub char_id: String,
    pub log_id: LogId,
    pub timestamp: Timestamp,
    pub actor_level: Option<u32>,
    pub target_level: Option<u32>,
    pub money_delta: Option<i64>,
    pub equip_score: Option<f64>,
    pub object_id: Option<String>,
    pub object_count: Option<u32>,
    pub guild_id: Option<String>,
}

impl Event {
    /// An event with only the mandatory fields set.
    pub fn bare(account_id: impl Into<String>, log_id: LogId, timestamp: Timestamp) -> Self {
        Event {
            account_id: account_id.into(),
            char_id: String::new(),
            log_id,
            timestamp,
            actor_level: None,
            target_level: None,
            money_delta: None,
            equip_score: None,
            object_id: None,
            object_count: None,
            guild_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub group: String,
}

/// Registered event kinds and the action group each one is summed into.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCatalog {
    entries: BTreeMap<LogId, CatalogEntry>,
}

impl EventCatalog {
    pub fn new() -> Self {
        EventCatalog::default()
    }

    pub fn insert(&mut self, id: LogId, name: &str, group: &str) -> Result<()> {
        if group.trim().is_empty() {
            return Err(Error::Format(format!("log_id {} has an empty group label", id.0)));
        }
        if self.entries.contains_key(&id) {
            return Err(Error::Format(format!("log_id {} registered twice", id.0)));
        }
        self.entries.insert(id, CatalogEntry { name: name.to_string(), group: group.to_string() });
        Ok(())
    }

    pub fn contains(&self, id: LogId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn get(&self, id: LogId) -> Option<&CatalogEntry> {
        self.entries.get(&id)
    }

    /// Group of a log id, or [`UNKNOWN_GROUP`] when it is not registered.
    pub fn group_of(&self, id: LogId) -> &str {
        self.entries.get(&id).map_or(UNKNOWN_GROUP, |e| e.group.as_str())
    }

    /// Distinct group labels in lexicographic order.
    pub fn groups(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.entries.values().map(|e| e.group.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LogId, &CatalogEntry)> {
        self.entries.iter().map(|(id, e)| (*id, e))
    }

    /// The fixed 20-kind catalog used by the synthetic generator. Ids are
    /// ordered from most to least frequent.
    pub fn standard() -> Self {
        let mut catalog = EventCatalog::new();
        for (i, (name, group)) in STANDARD_KINDS.iter().enumerate() {
            catalog.insert(LogId(i as u16), name, group).expect("standard catalog entries are unique");
        }
        catalog
    }
}

pub(crate) const STANDARD_KINDS: [(&str, &str); 20] = [
    ("EnterWorld", "connection"),
    ("KillNpc", "combat"),
    ("ItemGet", "item"),
    ("QuestProgress", "quest"),
    ("MoneyGain", "economy"),
    ("SkillUse", "skill"),
    ("ItemUse", "item"),
    ("QuestComplete", "quest"),
    ("Chat", "social"),
    ("MoneySpend", "economy"),
    ("Die", "combat"),
    ("LeaveWorld", "connection"),
    ("PartyJoin", "social"),
    ("ItemEnchant", "item"),
    ("LevelUp", "character"),
    ("KillPc", "combat"),
    ("Trade", "economy"),
    ("GuildJoin", "guild"),
    ("GuildInvite", "guild"),
    ("CreateCharacter", "character"),
];
