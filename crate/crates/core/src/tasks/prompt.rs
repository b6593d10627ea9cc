use std::collections::BTreeMap;

use super::config::TaskConfig;
use super::types::{TaskEntry, TaskType};
use super::TaskError;

pub const SSF_TEMPLATE: &str = "Please correct a syntax error in the following SPARQL query for Wikidata. Assume common prefixes like wd or wdt to be defined.
To support automated parsing, please answer with just a markdown fenced code block (start and end with ```) containing the sparql query, no other text.

Example for Answer format:
```sparql
SELECT ...
```

SPARQL:${sparql}

Error message: ${errorMessage}
";

pub const T2S_TEMPLATE: &str = "Please generate a SPARQL query for ${kgName} and the given question. Assume common prefixes ${commonPrefixes} to be defined.
To support automated parsing, please answer with just a markdown fenced code block (start and end with ```) containing the sparql query, no other text.

Example for Answer format:
```sparql
SELECT ...
```

Question:${question}

${KgInfo}
";

pub const S2A_TEMPLATE: &str = "Please evaluate the following SPARQL SELECT query on ${kgName} given below and answer with the values of the result bindings. Assume common prefixes ${commonPrefixes} to be defined.
To support automated parsing, please answer with one value per line and no other text.

SPARQL:
```sparql
${sparql}
```

${KgInfo}
";

pub const T2A_TEMPLATE: &str = "Please answer the following question using ${kgName} given below. Assume common prefixes ${commonPrefixes} to be defined.
To support automated parsing, please answer with one value per line and no other text.

Question:${question}

${KgInfo}
";

pub fn template_for(task_type: TaskType) -> &'static str {
    match task_type {
        TaskType::Ssf => SSF_TEMPLATE,
        TaskType::T2s => T2S_TEMPLATE,
        TaskType::S2a => S2A_TEMPLATE,
        TaskType::T2a => T2A_TEMPLATE,
    }
}

/// Substitutes `${name}` placeholders in one pass. Substituted text is not
/// rescanned; a placeholder without a binding is an error.
pub fn render_template(template: &str, bindings: &BTreeMap<&str, &str>) -> Result<String, TaskError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| TaskError::Template(format!("unterminated placeholder near {:?}", &rest[start..])))?;
        let name = &after[..end];
        let value = bindings
            .get(name)
            .ok_or_else(|| TaskError::Template(format!("no binding for placeholder ${{{name}}}")))?;
        out.push_str(value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Prefix labels as a comma-separated list; the default prefix shows as `:`.
pub fn common_prefixes(prefix_map: &BTreeMap<String, String>) -> String {
    prefix_map
        .keys()
        .map(|k| if k.is_empty() { ":".to_owned() } else { k.clone() })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render_prompt(config: &TaskConfig, entry: &TaskEntry, kg_info: &str) -> Result<String, TaskError> {
    let prefixes = common_prefixes(&config.prefix_map);
    let mut bindings: BTreeMap<&str, &str> = BTreeMap::new();
    bindings.insert("kgName", &config.kg_name);
    bindings.insert("commonPrefixes", &prefixes);
    bindings.insert("question", &entry.question);
    bindings.insert("KgInfo", kg_info);
    match config.task_type {
        TaskType::Ssf => {
            let broken = entry.broken_query.as_deref().ok_or_else(|| TaskError::MissingField {
                entry: entry.id.clone(),
                field: "brokenQuery",
            })?;
            let message = entry
                .parse_error_message
                .as_deref()
                .ok_or_else(|| TaskError::MissingField {
                    entry: entry.id.clone(),
                    field: "parseErrorMessage",
                })?;
            bindings.insert("sparql", broken);
            bindings.insert("errorMessage", message);
        }
        TaskType::S2a => {
            bindings.insert("sparql", &entry.reference_query);
        }
        TaskType::T2s | TaskType::T2a => {}
    }
    render_template(template_for(config.task_type), &bindings)
}
