//! Address-pattern routing.
//!
//! Patterns are matched segment by segment. A segment consisting of exactly
//! `*` matches any single segment; everything else must match literally.

use super::codec::OscMessage;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route<H> {
    pub pattern: String,
    pub handler: H,
}

#[derive(Debug, Clone)]
pub struct Router<H> {
    routes: Vec<Route<H>>,
}

impl<H> Default for Router<H> {
    fn default() -> Self {
        Router { routes: Vec::new() }
    }
}

impl<H: Clone> Router<H> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn route(mut self, pattern: impl Into<String>, handler: H) -> Self {
        self.add(pattern, handler);
        self
    }

    pub fn add(&mut self, pattern: impl Into<String>, handler: H) {
        self.routes.push(Route {
            pattern: pattern.into(),
            handler,
        });
    }

    pub fn routes(&self) -> &[Route<H>] {
        &self.routes
    }

    pub fn dispatch(&self, msg: &OscMessage) -> Option<H> {
        dispatch(msg, &self.routes)
    }
}

pub fn pattern_matches(pattern: &str, address: &str) -> bool {
    let mut p = pattern.split('/');
    let mut a = address.split('/');
    loop {
        match (p.next(), a.next()) {
            (None, None) => return true,
            (Some(ps), Some(as_)) => {
                if ps != "*" && ps != as_ {
                    return false;
                }
                if ps == "*" && as_.is_empty() {
                    return false;
                }
            }
            _ => return false,
        }
    }
}

/// First registered route whose pattern matches the message address.
pub fn dispatch<H: Clone>(msg: &OscMessage, routes: &[Route<H>]) -> Option<H> {
    routes
        .iter()
        .find(|r| pattern_matches(&r.pattern, &msg.address))
        .map(|r| r.handler.clone())
}
