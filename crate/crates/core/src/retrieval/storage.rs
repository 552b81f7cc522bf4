//! Single-file binary index format.
//!
//! All integers little-endian.
//!
//! ```text
//! header   magic "PFCBM25\0" (8 bytes) | version u32 | section_count u32
//! table    section_count x { tag [u8; 4] | offset u64 | length u64 }
//! sections
//!   PARM   k1 f64 | b f64
//!   DOCS   count u64 | count x { id str | title str | text str }
//!   LENS   count u64 | count x u32
//!   POST   terms u64 | terms x { term str | n u32 | n x { doc u32 | tf u32 } }
//! str      len u32 | UTF-8 bytes
//! ```
//!
//! Offsets are absolute from the start of the file. Terms in `POST` are
//! written in sorted order so identical indexes produce identical files.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::index::{Bm25Index, Bm25Params, Posting};
use super::{EvidenceDoc, RetrievalError};

pub const MAGIC: &[u8; 8] = b"PFCBM25\0";
pub const FORMAT_VERSION: u32 = 1;

const TAG_PARAMS: [u8; 4] = *b"PARM";
const TAG_DOCS: [u8; 4] = *b"DOCS";
const TAG_LENGTHS: [u8; 4] = *b"LENS";
const TAG_POSTINGS: [u8; 4] = *b"POST";

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

impl Bm25Index {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut params = Vec::with_capacity(16);
        params.extend_from_slice(&self.params.k1.to_le_bytes());
        params.extend_from_slice(&self.params.b.to_le_bytes());

        let mut docs = Vec::new();
        docs.extend_from_slice(&(self.docs.len() as u64).to_le_bytes());
        for d in &self.docs {
            put_str(&mut docs, &d.doc_id);
            put_str(&mut docs, &d.title);
            put_str(&mut docs, &d.text);
        }

        let mut lengths = Vec::with_capacity(8 + 4 * self.doc_lengths.len());
        lengths.extend_from_slice(&(self.doc_lengths.len() as u64).to_le_bytes());
        for &l in &self.doc_lengths {
            lengths.extend_from_slice(&l.to_le_bytes());
        }

        let mut terms: Vec<&String> = self.postings.keys().collect();
        terms.sort_unstable();
        let mut postings = Vec::new();
        postings.extend_from_slice(&(terms.len() as u64).to_le_bytes());
        for term in terms {
            let list = &self.postings[term];
            put_str(&mut postings, term);
            postings.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for p in list {
                postings.extend_from_slice(&p.doc.to_le_bytes());
                postings.extend_from_slice(&p.tf.to_le_bytes());
            }
        }

        let sections = [
            (TAG_PARAMS, params),
            (TAG_DOCS, docs),
            (TAG_LENGTHS, lengths),
            (TAG_POSTINGS, postings),
        ];
        let header_len = 8 + 4 + 4 + sections.len() * (4 + 8 + 8);
        let total: usize = header_len + sections.iter().map(|(_, s)| s.len()).sum::<usize>();
        let mut out = Vec::with_capacity(total);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
        let mut offset = header_len as u64;
        for (tag, body) in &sections {
            out.extend_from_slice(tag);
            out.extend_from_slice(&offset.to_le_bytes());
            out.extend_from_slice(&(body.len() as u64).to_le_bytes());
            offset += body.len() as u64;
        }
        for (_, body) in &sections {
            out.extend_from_slice(body);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        let mut file = fs::File::create(path)?;
        file.write_all(&self.to_bytes())?;
        file.sync_all()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RetrievalError> {
        let mut header = Reader::new(bytes);
        if header.take(8)? != MAGIC {
            return Err(format_err("bad magic bytes"));
        }
        let version = header.u32()?;
        if version != FORMAT_VERSION {
            return Err(format_err(format!("unsupported index version {version}")));
        }
        let count = header.u32()? as usize;
        let mut sections: HashMap<[u8; 4], &[u8]> = HashMap::new();
        for _ in 0..count {
            let tag: [u8; 4] = header.take(4)?.try_into().expect("4 bytes");
            let offset = header.u64()? as usize;
            let len = header.u64()? as usize;
            let end = offset
                .checked_add(len)
                .filter(|&e| e <= bytes.len())
                .ok_or_else(|| format_err("section out of bounds"))?;
            sections.insert(tag, &bytes[offset..end]);
        }
        let section = |tag: [u8; 4]| {
            sections.get(&tag).map(|s| Reader::new(s)).ok_or_else(|| {
                format_err(format!("missing section {}", String::from_utf8_lossy(&tag)))
            })
        };

        let mut r = section(TAG_PARAMS)?;
        let params = Bm25Params {
            k1: f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes")),
            b: f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes")),
        };

        let mut r = section(TAG_DOCS)?;
        let n_docs = r.u64()? as usize;
        let mut docs = Vec::with_capacity(n_docs.min(bytes.len()));
        for _ in 0..n_docs {
            docs.push(EvidenceDoc {
                doc_id: r.string()?,
                title: r.string()?,
                text: r.string()?,
            });
        }

        let mut r = section(TAG_LENGTHS)?;
        let n_lengths = r.u64()? as usize;
        if n_lengths != n_docs {
            return Err(format_err("document and length counts differ"));
        }
        let mut doc_lengths = Vec::with_capacity(n_docs);
        for _ in 0..n_lengths {
            doc_lengths.push(r.u32()?);
        }

        let mut r = section(TAG_POSTINGS)?;
        let n_terms = r.u64()? as usize;
        let mut postings = HashMap::with_capacity(n_terms.min(bytes.len()));
        for _ in 0..n_terms {
            let term = r.string()?;
            let n = r.u32()? as usize;
            let mut list = Vec::with_capacity(n.min(bytes.len()));
            for _ in 0..n {
                let doc = r.u32()?;
                if doc as usize >= n_docs {
                    return Err(format_err("posting refers to unknown document"));
                }
                list.push(Posting { doc, tf: r.u32()? });
            }
            postings.insert(term, list);
        }

        Bm25Index::from_parts(params, docs, doc_lengths, postings)
    }
}

fn format_err(msg: impl Into<String>) -> RetrievalError {
    RetrievalError::Format(msg.into())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], RetrievalError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| format_err("unexpected end of section"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, RetrievalError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, RetrievalError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn string(&mut self) -> Result<String, RetrievalError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| format_err("invalid UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Bm25Index {
        Bm25Index::from_docs(
            vec![
                EvidenceDoc::new(
                    "Interstellar",
                    "Interstellar",
                    "A 2014 film directed by Christopher Nolan.",
                ),
                EvidenceDoc::new(
                    "Nolan",
                    "Christopher Nolan",
                    "British-American filmmaker born in London.",
                ),
            ],
            Bm25Params { k1: 1.2, b: 0.75 },
        )
        .unwrap()
    }

    #[test]
    fn save_load_preserves_rankings() {
        let idx = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        idx.save(&path).unwrap();
        let loaded = Bm25Index::load(&path).unwrap();
        assert_eq!(loaded.params(), idx.params());
        assert_eq!(loaded.doc_lengths(), idx.doc_lengths());
        assert_eq!(
            loaded.retrieve("nolan film", 5),
            idx.retrieve("nolan film", 5)
        );
        assert_eq!(loaded.doc_by_id("Nolan"), idx.doc_by_id("Nolan"));
        assert_eq!(loaded.to_bytes(), idx.to_bytes());
    }

    #[test]
    fn rejects_corrupt_files() {
        let bytes = sample().to_bytes();
        assert!(Bm25Index::from_bytes(b"NOTANIDX").is_err());
        let mut wrong_version = bytes.clone();
        wrong_version[8] = 99;
        assert!(matches!(
            Bm25Index::from_bytes(&wrong_version),
            Err(RetrievalError::Format(m)) if m.contains("version")
        ));
        for cut in [10, 40, bytes.len() - 3] {
            assert!(
                Bm25Index::from_bytes(&bytes[..cut]).is_err(),
                "cut at {cut}"
            );
        }
    }
}
