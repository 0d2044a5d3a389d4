#include "sentsel/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>

#include "sentsel/rng.hpp"
#include "sentsel/text.hpp"

namespace sentsel {

namespace {

constexpr std::array<std::string_view, 3> kMinimal = {
    "had only minimal effects on native invertebrate assemblages",
    "caused minimal and transient changes in resident plankton",
    "showed minimal competition with native fish for food"};
constexpr std::array<std::string_view, 3> kMinor = {
    "caused minor reductions in the growth rates of native individuals",
    "had a minor effect on the fitness of native competitors",
    "led to minor shifts in the foraging behaviour of native birds"};
constexpr std::array<std::string_view, 3> kModerate = {
    "caused moderate declines in the population size of native species",
    "produced a moderate decrease in the abundance of native amphibians",
    "drove moderate population declines of native snails"};
constexpr std::array<std::string_view, 3> kMajor = {
    "caused major local extinctions of native populations",
    "led to the major loss of several native subpopulations",
    "resulted in the major disappearance of native species from entire sites"};
constexpr std::array<std::string_view, 3> kMassive = {
    "caused massive and irreversible collapse of the native community",
    "produced massive global extinctions of native taxa",
    "triggered massive irreversible change of the whole ecosystem"};
constexpr std::array<std::string_view, 3> kDeficient = {
    "left the impact on natives data deficient because sampling was sparse",
    "yielded data deficient and inconclusive records of any impact",
    "remained data deficient so that no inference on impact was possible"};

constexpr std::array<std::string_view, 4> kSignalOpeners = {
    "In our field surveys, ", "We observed that ", "Our experiments showed that ",
    "Across all monitored plots, "};
constexpr std::array<std::string_view, 3> kOtherOpeners = {
    "Earlier reports noted that ", "A previous review stated that ",
    "In a distant region, "};

constexpr std::array<std::string_view, 20> kGenera = {
    "Lates", "Procambarus", "Dreissena", "Pomacea", "Rattus", "Sus", "Bufo",
    "Cyprinus", "Oncorhynchus", "Pacifastacus", "Eriocheir", "Carassius",
    "Gambusia", "Mustela", "Vespa", "Linepithema", "Anoplophora", "Harmonia",
    "Trachemys", "Myocastor"};
constexpr std::array<std::string_view, 20> kEpithets = {
    "niloticus", "clarkii", "polymorpha", "canaliculata", "rattus", "scrofa",
    "marinus", "carpio", "mykiss", "leniusculus", "sinensis", "auratus",
    "holbrooki", "vison", "velutina", "humile", "glabripennis", "axyridis",
    "scripta", "coypus"};

constexpr std::array<std::string_view, 8> kHabitats = {
    "lake", "river", "wetland", "grassland", "forest", "estuary", "island", "reservoir"};
constexpr std::array<std::string_view, 4> kSeasons = {"spring", "summer", "autumn", "winter"};
constexpr std::array<std::string_view, 6> kTools = {
    "mixed models", "generalized additive models", "permutation tests",
    "rank correlation", "linear regression", "ordination"};

std::string_view pick(Rng& rng, std::span<const std::string_view> items) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

std::string number(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::to_string(lo + rng.below(hi - lo + 1));
}

std::string filler_sentence(Rng& rng) {
  const std::string habitat(pick(rng, kHabitats));
  switch (rng.below(12)) {
    case 0:
      return "Samples were collected from " + number(rng, 3, 60) + " " + habitat +
             " sites during " + std::string(pick(rng, kSeasons)) + ".";
    case 1:
      return "Water temperature ranged between " + number(rng, 4, 12) + " and " +
             number(rng, 14, 30) + " degrees at the sampling stations.";
    case 2:
      return "Statistical analyses were performed with " + std::string(pick(rng, kTools)) +
             " at a significance level of 0.05.";
    case 3:
      return "The study area covers approximately " + number(rng, 10, 900) +
             " square kilometres of " + habitat + " habitat.";
    case 4:
      return "Specimens were identified with standard taxonomic keys and stored in ethanol.";
    case 5:
      return "Each transect was visited " + number(rng, 2, 9) +
             " times and surveyed by two observers.";
    case 6:
      return "Mean annual precipitation in the " + habitat + " region is about " +
             number(rng, 300, 2500) + " millimetres.";
    case 7:
      return "Traps were checked every " + number(rng, 1, 7) +
             " days and emptied into labelled containers.";
    case 8:
      return "Vegetation cover was estimated visually in quadrats of " + number(rng, 1, 25) +
             " square metres.";
    case 9:
      return "Funding for fieldwork was provided by a regional conservation agency.";
    case 10:
      return "Altitude of the " + habitat + " plots varied from " + number(rng, 0, 400) +
             " to " + number(rng, 500, 2200) + " metres.";
    default:
      return "Laboratory measurements were repeated " + number(rng, 2, 5) +
             " times to estimate measurement error.";
  }
}

std::string species_name(std::size_t i) {
  return std::string(kGenera[i % kGenera.size()]) + " " +
         std::string(kEpithets[(i / kGenera.size() + i) % kEpithets.size()]);
}

}  // namespace

std::span<const std::string_view> class_phrases(ImpactCategory category) {
  switch (category) {
    case ImpactCategory::kMinimalConcern: return kMinimal;
    case ImpactCategory::kMinor: return kMinor;
    case ImpactCategory::kModerate: return kModerate;
    case ImpactCategory::kMajor: return kMajor;
    case ImpactCategory::kMassive: return kMassive;
    case ImpactCategory::kDataDeficient: return kDeficient;
  }
  throw std::invalid_argument("unknown category");
}

std::vector<Document> generate_synthetic_corpus(const SyntheticConfig& cfg) {
  if (cfg.documents_per_species == 0 || cfg.min_other_species > cfg.max_other_species) {
    throw std::invalid_argument("invalid synthetic corpus configuration");
  }
  const std::size_t species_count =
      (cfg.documents + cfg.documents_per_species - 1) / cfg.documents_per_species;
  if (species_count + 1 > kGenera.size() * kEpithets.size()) {
    throw std::invalid_argument("too many species for the synthetic name pool");
  }

  // A fixed pool of names; targets take the first `species_count`, other-species
  // mentions draw from the rest.
  const std::size_t pool_size = std::min<std::size_t>(
      kGenera.size() * kEpithets.size(), species_count + 40);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < pool_size; ++i) names.push_back(species_name(i));
  Rng name_rng(derive_seed({cfg.seed, fnv1a64("synthetic_species")}));
  name_rng.shuffle(names);

  std::vector<Document> corpus;
  for (std::size_t d = 0; d < cfg.documents; ++d) {
    Rng rng(derive_seed({cfg.seed, fnv1a64("synthetic_document"), d}));
    const std::size_t s = d / cfg.documents_per_species;
    const auto label = static_cast<ImpactCategory>(s % kCategoryCount);
    const std::string& species = names[s];

    auto wrong = static_cast<ImpactCategory>(
        (index_of(label) + 1 + rng.below(kCategoryCount - 1)) % kCategoryCount);
    const std::size_t others =
        cfg.min_other_species + rng.below(cfg.max_other_species - cfg.min_other_species + 1);

    std::vector<std::pair<std::string, bool>> texts;
    // Distinct opener/phrase pairs while they last, so evidence texts are unique.
    const auto phrases = class_phrases(label);
    std::vector<std::size_t> combos(kSignalOpeners.size() * phrases.size());
    for (std::size_t i = 0; i < combos.size(); ++i) combos[i] = i;
    rng.shuffle(combos);
    for (std::size_t i = 0; i < cfg.signal_sentences; ++i) {
      std::size_t combo = combos[i % combos.size()];
      texts.emplace_back(std::string(kSignalOpeners[combo % kSignalOpeners.size()]) + species +
                             " " + std::string(phrases[combo / kSignalOpeners.size()]) + ".",
                         true);
    }
    for (std::size_t i = 0; i < others; ++i) {
      const std::string& other =
          names[species_count + static_cast<std::size_t>(rng.below(pool_size - species_count))];
      texts.emplace_back(std::string(pick(rng, kOtherOpeners)) + other + " " +
                             std::string(pick(rng, class_phrases(wrong))) + ".",
                         false);
    }
    for (std::size_t i = 0; i < cfg.distractor_sentences; ++i) {
      texts.emplace_back(filler_sentence(rng), false);
    }
    rng.shuffle(texts);

    Document doc;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%04zu", d);
    doc.doc_id = id;
    doc.species = species;
    doc.title = "Field observations of " + species + " in " +
                std::string(pick(rng, kHabitats)) + " ecosystems";
    doc.label = label;
    std::vector<std::size_t> evidence;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      doc.sentences.push_back(
          Sentence{i, texts[i].first, reference_token_count(texts[i].first)});
      if (texts[i].second) evidence.push_back(i);
    }
    doc.evidence_indices = std::move(evidence);
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace sentsel
