#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ingest/hypernymy.hpp"
#include "ingest/sentence.hpp"

namespace orthoprobe::ingest {

/// Parses CoNLL-U text. Multiword-token ranges (`3-4`) and empty nodes
/// (`5.1`) are dropped. A `LexNode=<id>` entry in MISC is kept on the token.
///
/// Errors: ParseError (with line number) for malformed lines,
/// StructuralError (with sentence id) for invalid head structure.
std::vector<SentenceAnnotation> parse_conllu(std::string_view text);

std::vector<SentenceAnnotation> load_conllu(const std::string& path);

/// Fills `sentence.lex` from the tokens' lexnodes. Tokens without a lexnode
/// are masked; pairs are valid only inside one tree of the forest.
void annotate_lexical(SentenceAnnotation& sentence, const HypernymyForest& forest);

/// Serialises sentences back to CoNLL-U. When `heads` is non-empty it
/// replaces the HEAD column (one vector per sentence) and DEPREL becomes `_`.
std::string write_conllu(std::span<const SentenceAnnotation> sentences,
                         std::span<const std::vector<int>> heads = {});

}  // namespace orthoprobe::ingest
