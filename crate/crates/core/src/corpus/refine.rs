use crate::annotate::{AnnotatedDocument, SpanKind};

/// Keep only sentences with at least one temporal expression, re-basing
/// token and span indices; a document left without sentences is `None`.
pub fn refine_document(doc: &AnnotatedDocument) -> Option<AnnotatedDocument> {
    let kept: Vec<(usize, usize)> = doc
        .sentence_bounds
        .iter()
        .copied()
        .filter(|&(a, b)| {
            doc.spans_of(SpanKind::TemporalExpression)
                .any(|s| s.token_start >= a && s.token_end <= b)
        })
        .collect();
    if kept.is_empty() {
        return None;
    }
    let mut new_index = vec![None; doc.tokens.len()];
    let mut tokens = Vec::new();
    let mut sentence_bounds = Vec::new();
    for &(a, b) in &kept {
        let start = tokens.len();
        for (i, tok) in doc.tokens[a..b].iter().enumerate() {
            new_index[a + i] = Some(tokens.len());
            tokens.push(tok.clone());
        }
        sentence_bounds.push((start, tokens.len()));
    }
    let spans = doc
        .spans
        .iter()
        .filter_map(|s| {
            let start = new_index[s.token_start]?;
            let mut span = s.clone();
            span.token_start = start;
            span.token_end = start + s.len();
            Some(span)
        })
        .collect();
    Some(AnnotatedDocument {
        id: doc.id.clone(),
        timestamp: doc.timestamp,
        text: doc.text.clone(),
        tokens,
        spans,
        sentence_bounds,
    })
}

/// Drop sentences lacking explicit content time, then documents left empty.
pub fn refine_corpus<'a, I>(docs: I) -> impl Iterator<Item = AnnotatedDocument> + 'a
where
    I: IntoIterator<Item = &'a AnnotatedDocument>,
    I::IntoIter: 'a,
{
    docs.into_iter().filter_map(refine_document)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{annotate_document, PersonMode, SignalLexicon};

    fn doc(text: &str) -> AnnotatedDocument {
        annotate_document("d", "2001-02-03", text, &PersonMode::Heuristic, &SignalLexicon::default()).unwrap()
    }

    fn words(d: &AnnotatedDocument) -> Vec<&str> {
        d.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn keeps_only_dated_sentences() {
        let d = doc("Mr. Smith spoke. He had left in 1999 after Tupac Shakur died. Nobody cared.");
        assert_eq!(d.sentence_bounds.len(), 3);
        let r = refine_document(&d).unwrap();
        assert_eq!(r.sentence_bounds, vec![(0, r.tokens.len())]);
        assert_eq!(words(&r), ["He", "had", "left", "in", "1999", "after", "Tupac", "Shakur", "died", "."]);
        let kinds: Vec<_> = r.spans.iter().map(|s| (s.kind, s.surface.as_str(), s.token_start)).collect();
        assert_eq!(kinds, [
            (SpanKind::TemporalSignal, "in", 3),
            (SpanKind::TemporalExpression, "1999", 4),
            (SpanKind::TemporalSignal, "after", 5),
            (SpanKind::Person, "Tupac Shakur", 6),
        ]);
    }

    #[test]
    fn drops_undated_documents() {
        assert!(refine_document(&doc("Nothing happened before the vote.")).is_none());
    }

    #[test]
    fn fully_dated_documents_are_unchanged() {
        let d = doc("In 1999 it rained. By 2001 it stopped.");
        assert_eq!(refine_document(&d).unwrap(), d);
    }

    #[test]
    fn idempotent() {
        let d = doc("Quiet. Then in May 2003 things changed. Later still.");
        let once = refine_document(&d).unwrap();
        assert_eq!(refine_document(&once).unwrap(), once);
    }
}
