//! Sequential ListRecords harvesting with resumption tokens.

use std::collections::VecDeque;
use std::thread;
use std::time::{Duration, Instant};

use quick_xml::events::Event;
use quick_xml::Reader;

use super::CorpusError;

#[derive(Debug, Clone)]
pub struct HarvestConfig {
    pub endpoint: String,
    pub metadata_prefix: String,
    pub set_spec: Option<String>,
    /// Minimum gap between the start of consecutive requests.
    pub min_delay: Duration,
    pub retries: u32,
    /// First retry waits this long; each further retry doubles it.
    pub backoff: Duration,
    pub timeout: Duration,
    /// Send only `verb` and `resumptionToken` on continuation requests, as
    /// the protocol requires. Off by default; most servers accept both.
    pub strict_resumption: bool,
}

impl HarvestConfig {
    pub fn new(endpoint: impl Into<String>, metadata_prefix: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            metadata_prefix: metadata_prefix.into(),
            set_spec: None,
            min_delay: Duration::from_millis(1000),
            retries: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(60),
            strict_resumption: false,
        }
    }
}

/// One parsed ListRecords response.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub records: Vec<String>,
    pub resumption_token: Option<String>,
}

/// Splits a ListRecords response into raw `<record>` strings.
///
/// `noRecordsMatch` yields an empty page; any other OAI error is a protocol error.
pub fn parse_page(xml: &str) -> Result<Page, CorpusError> {
    let mut reader = Reader::from_str(xml);
    let mut records = Vec::new();
    let mut token: Option<String> = None;
    let mut in_token = false;
    let mut record_start: Option<(usize, usize)> = None;
    let mut depth = 0usize;
    let mut error: Option<(String, String)> = None;
    let mut in_error = false;

    loop {
        let before = reader.buffer_position() as usize;
        let event = reader.read_event().map_err(|e| CorpusError::Xml(e.to_string()))?;
        match event {
            Event::Start(e) => {
                depth += 1;
                let name = e.local_name();
                match name.as_ref() {
                    b"record" if record_start.is_none() => record_start = Some((before, depth)),
                    b"resumptionToken" if record_start.is_none() => {
                        in_token = true;
                        token.get_or_insert_with(String::new);
                    }
                    b"error" if record_start.is_none() => {
                        in_error = true;
                        let code = e
                            .attributes()
                            .flatten()
                            .find(|a| a.key.as_ref() == b"code")
                            .and_then(|a| a.unescape_value().ok())
                            .map(|v| v.into_owned())
                            .unwrap_or_default();
                        error = Some((code, String::new()));
                    }
                    _ => {}
                }
            }
            Event::Empty(e) => {
                let name = e.local_name();
                match name.as_ref() {
                    b"record" if record_start.is_none() => {
                        records.push(xml[before..reader.buffer_position() as usize].to_string())
                    }
                    b"error" if record_start.is_none() => {
                        let code = e
                            .attributes()
                            .flatten()
                            .find(|a| a.key.as_ref() == b"code")
                            .and_then(|a| a.unescape_value().ok())
                            .map(|v| v.into_owned())
                            .unwrap_or_default();
                        error = Some((code, String::new()));
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                let text = t.decode().map_err(|e| CorpusError::Xml(e.to_string()))?;
                if in_token {
                    token.get_or_insert_with(String::new).push_str(&text);
                } else if in_error {
                    if let Some((_, msg)) = error.as_mut() {
                        msg.push_str(&text);
                    }
                }
            }
            Event::GeneralRef(r) => {
                if in_token {
                    let name = r.decode().map_err(|e| CorpusError::Xml(e.to_string()))?;
                    let resolved = match r.resolve_char_ref().map_err(|e| CorpusError::Xml(e.to_string()))? {
                        Some(c) => c.to_string(),
                        None => quick_xml::escape::resolve_predefined_entity(&name)
                            .ok_or_else(|| CorpusError::Protocol(format!("undefined entity &{name}; in resumptionToken")))?
                            .to_string(),
                    };
                    token.get_or_insert_with(String::new).push_str(&resolved);
                }
            }
            Event::End(_) => {
                if let Some((start, d)) = record_start {
                    if d == depth {
                        records.push(xml[start..reader.buffer_position() as usize].to_string());
                        record_start = None;
                    }
                }
                in_token = false;
                in_error = false;
                depth = depth.saturating_sub(1);
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if let Some((code, message)) = error {
        if code == "noRecordsMatch" {
            return Ok(Page { records: Vec::new(), resumption_token: None });
        }
        return Err(CorpusError::Protocol(format!("OAI error {code}: {}", message.trim())));
    }

    let resumption_token = match token {
        None => None,
        Some(t) if t.trim().is_empty() => None,
        Some(t) => {
            let t = t.trim().to_string();
            if t.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(CorpusError::Protocol(format!("malformed resumptionToken {t:?}")));
            }
            Some(t)
        }
    };
    Ok(Page { records, resumption_token })
}

/// Lazy stream of raw record XML, fetched page by page.
pub struct Harvest {
    config: HarvestConfig,
    agent: ureq::Agent,
    buffer: VecDeque<String>,
    next_token: Option<String>,
    seen_tokens: Vec<String>,
    finished: bool,
    last_request: Option<Instant>,
    pages_fetched: usize,
}

pub fn harvest(config: HarvestConfig) -> Harvest {
    let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
    Harvest {
        config,
        agent,
        buffer: VecDeque::new(),
        next_token: None,
        seen_tokens: Vec::new(),
        finished: false,
        last_request: None,
        pages_fetched: 0,
    }
}

impl Harvest {
    pub fn pages_fetched(&self) -> usize {
        self.pages_fetched
    }

    fn pace(&mut self) {
        if let Some(last) = self.last_request {
            let elapsed = last.elapsed();
            if elapsed < self.config.min_delay {
                thread::sleep(self.config.min_delay - elapsed);
            }
        }
        self.last_request = Some(Instant::now());
    }

    fn request(&self, token: Option<&str>) -> ureq::Request {
        let cfg = &self.config;
        let mut req = self.agent.get(&cfg.endpoint).query("verb", "ListRecords");
        let continuation = token.is_some() && cfg.strict_resumption;
        if !continuation {
            req = req.query("metadataPrefix", &cfg.metadata_prefix);
            if let Some(set) = &cfg.set_spec {
                req = req.query("set", set);
            }
        }
        if let Some(t) = token {
            req = req.query("resumptionToken", t);
        }
        req
    }

    fn fetch(&mut self, token: Option<String>) -> Result<String, CorpusError> {
        let mut attempt = 0;
        loop {
            self.pace();
            let req = self.request(token.as_deref());
            let url = req.url().to_string();
            let outcome = req.call().map_err(|e| e.to_string()).and_then(|resp| {
                resp.into_string().map_err(|e| e.to_string())
            });
            match outcome {
                Ok(body) => return Ok(body),
                Err(message) if attempt >= self.config.retries => {
                    return Err(CorpusError::Transport { url, message });
                }
                Err(message) => {
                    let wait = self.config.backoff * 2u32.saturating_pow(attempt);
                    tracing::warn!(%url, %message, attempt = attempt + 1, ?wait, "request failed, retrying");
                    thread::sleep(wait);
                    attempt += 1;
                }
            }
        }
    }

    fn next_page(&mut self) -> Result<(), CorpusError> {
        let token = self.next_token.take();
        let body = self.fetch(token)?;
        self.pages_fetched += 1;
        let page = parse_page(&body)?;
        tracing::debug!(records = page.records.len(), page = self.pages_fetched, "harvested page");
        self.buffer.extend(page.records);
        match page.resumption_token {
            Some(t) if self.seen_tokens.contains(&t) => {
                return Err(CorpusError::Protocol(format!("resumptionToken {t:?} repeated")));
            }
            Some(t) => {
                self.seen_tokens.push(t.clone());
                self.next_token = Some(t);
            }
            None => self.finished = true,
        }
        Ok(())
    }
}

impl Iterator for Harvest {
    type Item = Result<String, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(r) = self.buffer.pop_front() {
                return Some(Ok(r));
            }
            if self.finished {
                return None;
            }
            if let Err(e) = self.next_page() {
                self.finished = true;
                return Some(Err(e));
            }
        }
    }
}
