//! Line-delimited JSON corpus reader: one `{id, title, text}` object per line.

use std::io::BufRead;

use serde::Deserialize;

use super::{EvidenceDoc, RetrievalError};

#[derive(Deserialize)]
#[serde(untagged)]
enum DocId {
    Text(String),
    Number(i64),
}

#[derive(Deserialize)]
struct CorpusLine {
    id: DocId,
    #[serde(default)]
    title: String,
    text: String,
}

/// Streams documents from a JSONL reader, skipping blank lines.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<EvidenceDoc, RetrievalError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed =
                serde_json::from_str::<CorpusLine>(&line).map_err(|source| RetrievalError::Json {
                    line: self.line_no,
                    source,
                });
            return Some(parsed.map(|c| EvidenceDoc {
                doc_id: match c.id {
                    DocId::Text(s) => s,
                    DocId::Number(n) => n.to_string(),
                },
                title: c.title,
                text: c.text,
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_docs_and_reports_bad_lines() {
        let data = "{\"id\":\"a\",\"title\":\"A\",\"text\":\"alpha\"}\n\n{\"id\":7,\"text\":\"seven\"}\n{oops\n";
        let docs: Vec<_> = CorpusReader::new(data.as_bytes()).collect();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[0].as_ref().unwrap().title, "A");
        assert_eq!(docs[1].as_ref().unwrap().doc_id, "7");
        match &docs[2] {
            Err(RetrievalError::Json { line, .. }) => assert_eq!(*line, 4),
            other => panic!("{other:?}"),
        }
    }
}
