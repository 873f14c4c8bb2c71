use super::DatasetRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptMode {
    /// Full demonstration including the target.
    Train,
    /// Prompt ending where the model should continue.
    Inference,
}

/// Renders a record as a prompt.
///
/// ```text
/// Transform (A+H): <input>
/// Intermediate: <intermediate>
/// Output: <output>
/// ```
///
/// The intermediate line only appears for nested records when
/// `with_intermediate` is set. Inference prompts stop at the first line the
/// model must produce (`Intermediate:` or `Output:`).
pub fn render_prompt(rec: &DatasetRecord, mode: PromptMode, with_intermediate: bool) -> String {
    let mut out = format!("Transform ({}): {}", rec.label_key(), rec.input);
    let show_mid = with_intermediate && !rec.intermediates.is_empty();
    match mode {
        PromptMode::Train => {
            if show_mid {
                for mid in &rec.intermediates {
                    out.push_str("\nIntermediate: ");
                    out.push_str(mid);
                }
            }
            out.push_str("\nOutput: ");
            out.push_str(&rec.output);
        }
        PromptMode::Inference => {
            out.push_str(if show_mid { "\nIntermediate:" } else { "\nOutput:" });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasetgen::Split;

    fn nested() -> DatasetRecord {
        DatasetRecord {
            id: "C+H-00000".into(),
            labels: vec!['C', 'H'],
            transform_names: vec!["np_passive_3".into(), "i_movement".into()],
            input: "The baker took the muffin away.".into(),
            intermediates: vec!["The muffin was taken away by the baker.".into()],
            output: "Was the muffin taken away by the baker?".into(),
            words: vec![],
            seed: 1,
            split: Split::Train,
        }
    }

    #[test]
    fn single_prompt() {
        let mut rec = nested();
        rec.labels = vec!['A'];
        rec.intermediates.clear();
        rec.output = "X.".into();
        assert_eq!(
            render_prompt(&rec, PromptMode::Train, true),
            "Transform (A): The baker took the muffin away.\nOutput: X."
        );
        assert_eq!(
            render_prompt(&rec, PromptMode::Inference, true),
            "Transform (A): The baker took the muffin away.\nOutput:"
        );
    }

    #[test]
    fn nested_prompts() {
        let rec = nested();
        assert_eq!(
            render_prompt(&rec, PromptMode::Train, true),
            "Transform (C+H): The baker took the muffin away.\n\
             Intermediate: The muffin was taken away by the baker.\n\
             Output: Was the muffin taken away by the baker?"
        );
        assert_eq!(
            render_prompt(&rec, PromptMode::Train, false),
            "Transform (C+H): The baker took the muffin away.\n\
             Output: Was the muffin taken away by the baker?"
        );
        assert!(render_prompt(&rec, PromptMode::Inference, true).ends_with("\nIntermediate:"));
        assert!(render_prompt(&rec, PromptMode::Inference, false).ends_with("\nOutput:"));
    }
}
