/// Isolates the program lines from a raw completion.
///
/// Leading blank lines are skipped; the block then runs until the first blank
/// line, the first line starting with `#`, or the end of text. Returns an
/// empty string when the block holds no assignment line.
pub fn extract_program_block(completion: &str) -> String {
    let mut block: Vec<&str> = Vec::new();
    for line in completion.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if block.is_empty() {
                continue;
            }
            break;
        }
        if trimmed.starts_with('#') {
            break;
        }
        block.push(line);
    }
    if block.iter().any(|l| l.contains('=')) {
        block.join("\n")
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROGRAM: &str = "    fact_1 = Verify(\"James Cameron was born in Canada.\")\n    Answer_1 = Question(\"Who is the director of the film Interstellar?\")\n    fact_2 = Verify(\"{Answer_1} was born in Canada.\")\n    label = Predict(fact_1 and fact_2)";

    #[test]
    fn stops_at_next_claim_comment() {
        let completion =
            format!("\n{PROGRAM}\n\n# The claim is that something else\ndef program():\n    x = 1");
        assert_eq!(extract_program_block(&completion), PROGRAM);
        let completion = format!("{PROGRAM}\n# The claim is that more");
        assert_eq!(extract_program_block(&completion), PROGRAM);
    }

    #[test]
    fn whitespace_only_is_empty() {
        assert_eq!(extract_program_block("   \n\t\n  \n"), "");
        assert_eq!(extract_program_block(""), "");
        assert_eq!(extract_program_block("I cannot write that program."), "");
    }

    #[test]
    fn clean_program_is_identity() {
        assert_eq!(extract_program_block(PROGRAM), PROGRAM);
    }
}
