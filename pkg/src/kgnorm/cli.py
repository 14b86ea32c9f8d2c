"""Command-line entry points."""

from __future__ import annotations

import json
import logging
import sys

import click

from .errors import KgnormError
from .model import ConflationPolicy, TypeTaxonomy

DEFAULT_PORT = 8000


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, ensure_ascii=False))


def _load_normalizer(compendia, gene_protein, drug_chemical, types):
    from .normalizer import load_index

    taxonomy = TypeTaxonomy.from_file(types) if types else None
    return load_index(compendia, gene_protein, drug_chemical, taxonomy)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose: bool) -> None:
    """Identifier cliques, normalization services and graph builds."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")


@cli.command("build-cliques")
@click.option("--mappings", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--labels", multiple=True, type=click.Path(exists=True))
@click.option("--enrich", multiple=True, type=click.Path(exists=True))
@click.option("--prefs", required=True, type=click.Path(exists=True))
@click.option("--types", "types_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--synonyms", "synonyms_out", type=click.Path(), help="Also write a synonym file.")
@click.option("--hints", type=click.Path(exists=True), help="prefix<TAB>type hints; derived from --prefs if absent.")
@click.option("--default-type", help="Type for cliques no hint covers.")
@click.option("--filter", "filter_path", type=click.Path(exists=True), help="Allowed prefix pairs.")
@click.option("--singletons/--no-singletons", default=False, help="Turn every labelled id into a clique.")
@click.option("--max-label-length", default=100, show_default=True)
def build_cliques_cmd(mappings, labels, enrich, prefs, types_path, out, synonyms_out, hints, default_type, filter_path, singletons, max_label_length):
    """Build one compendium from mapping, label and enrichment files."""
    from .pipeline import run_clique_pipeline

    result = run_clique_pipeline(
        mappings, labels, enrich, prefs, types_path, out, synonyms_out, hints, default_type, filter_path, singletons, max_label_length
    )
    s = result.mapping_stats
    click.echo(f"{len(result.cliques)} cliques -> {out} ({s.yielded} mappings used, {s.rejected} rejected)")


@cli.command("build-conflations")
@click.option("--policy", required=True, type=click.Choice(["gene-protein", "drug-chemical"]))
@click.option("--mappings", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--compendia", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--types", "types_path", type=click.Path(exists=True))
def build_conflations_cmd(policy, mappings, compendia, out, types_path):
    """Group cross-type cliques into ordered conflation sets."""
    from .pipeline import run_conflation_pipeline

    sets = run_conflation_pipeline(ConflationPolicy.parse(policy), mappings, compendia, out, types_path)
    click.echo(f"{len(sets)} conflation sets -> {out}")


@cli.command("detect-duplicates")
@click.option("--compendia", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def detect_duplicates_cmd(compendia, out):
    """Report identifiers in several cliques and labels shared by several leaders."""
    from .cliques import detect_duplicates
    from .compendium import write_reports

    n = write_reports(detect_duplicates(compendia), out)
    click.echo(f"{n} report rows -> {out}")


@cli.command("export-kgx")
@click.option("--compendia", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--nodes", required=True, type=click.Path())
@click.option("--edges", required=True, type=click.Path())
def export_kgx_cmd(compendia, nodes, edges):
    """Write cliques as KGX node lines plus member same_as leader edges."""
    from .compendium import export_kgx_equivalence, read_compendium

    cliques = (c for p in compendia for c in read_compendium(p))
    n, e = export_kgx_equivalence(cliques, nodes, edges)
    click.echo(f"{n} nodes, {e} edges")


normalizer_options = [
    click.option("--compendia", multiple=True, required=True, type=click.Path(exists=True)),
    click.option("--gene-protein", multiple=True, type=click.Path(exists=True)),
    click.option("--drug-chemical", multiple=True, type=click.Path(exists=True)),
    click.option("--types", "types_path", type=click.Path(exists=True)),
]


def with_normalizer_options(fn):
    for opt in reversed(normalizer_options):
        fn = opt(fn)
    return fn


@cli.command("normalize")
@with_normalizer_options
@click.option("--curie", "curies", multiple=True, required=True)
@click.option("--conflate", is_flag=True, help="Apply GeneProtein conflation.")
@click.option("--drug-chemical-conflate", is_flag=True, help="Apply DrugChemical conflation.")
def normalize_cmd(compendia, gene_protein, drug_chemical, types_path, curies, conflate, drug_chemical_conflate):
    """Normalize identifiers once and print the JSON result."""
    from .normalizer import normalize_batch

    index = _load_normalizer(compendia, gene_protein, drug_chemical, types_path)
    results = normalize_batch(index, curies, conflate, drug_chemical_conflate)
    _echo_json({k: (v.to_json() if v else None) for k, v in results.items()})


@cli.command("serve-normalizer")
@with_normalizer_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=DEFAULT_PORT, show_default=True)
def serve_normalizer_cmd(compendia, gene_protein, drug_chemical, types_path, host, port):
    """Serve /get_normalized_nodes and /status over HTTP."""
    import uvicorn

    from .normalizer import IndexHolder, create_app

    holder = IndexHolder(_load_normalizer(compendia, gene_protein, drug_chemical, types_path))
    uvicorn.run(create_app(holder), host=host, port=port)


@cli.command("lookup")
@click.option("--synonyms", "synonym_files", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--string", "query", required=True)
@click.option("--autocomplete", is_flag=True)
@click.option("--limit", default=10, show_default=True)
@click.option("--biolink-type", "type_filter")
@click.option("--only-prefixes", help="Comma-separated leader prefixes.")
@click.option("--only-taxa", help="Comma-separated taxon ids.")
def lookup_cmd(synonym_files, query, autocomplete, limit, type_filter, only_prefixes, only_taxa):
    """Search labels and synonyms."""
    from .search import build_search_index

    index = build_search_index(synonym_files)
    matches = index.lookup(
        query,
        autocomplete=autocomplete,
        limit=limit,
        type_filter=type_filter,
        prefix_filter=only_prefixes.split(",") if only_prefixes else None,
        taxa_filter=only_taxa.split(",") if only_taxa else None,
    )
    _echo_json([m.to_json() for m in matches])


@cli.command("serve-name-lookup")
@click.option("--synonyms", "synonym_files", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=DEFAULT_PORT + 1, show_default=True)
def serve_name_lookup_cmd(synonym_files, host, port):
    """Serve /lookup and /synonyms over HTTP."""
    import uvicorn

    from .search import SearchIndexHolder, build_search_index, create_app

    uvicorn.run(create_app(SearchIndexHolder(build_search_index(synonym_files))), host=host, port=port)


@cli.command("build-graph")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--workdir", default=".cache", show_default=True, type=click.Path())
@click.option("--out", "out_dir", type=click.Path())
def build_graph_cmd(spec_path, workdir, out_dir):
    """Build a merged graph from a graphspec, reusing cached stage artifacts."""
    from .graph import build_from_graphspec, load_graphspec

    result = build_from_graphspec(load_graphspec(spec_path), workdir, out_dir)
    md = result.metadata
    click.echo(
        f"{md['node_count']} nodes, {md['edge_count']} edges -> {result.nodes.parent} "
        f"({len(result.executed)} stages run, {len(result.skipped)} cached)"
    )


@cli.command("analyze-overlap")
@click.option("--sets", "sets_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--compendia", multiple=True, type=click.Path(exists=True))
@click.option("--gene-protein", multiple=True, type=click.Path(exists=True))
@click.option("--drug-chemical", multiple=True, type=click.Path(exists=True))
@click.option("--conflate", is_flag=True)
@click.option("--drug-chemical-conflate", is_flag=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True, help="Render heatmaps (png and svg).")
def analyze_overlap_cmd(sets_dir, compendia, gene_protein, drug_chemical, conflate, drug_chemical_conflate, out, figures):
    """Pairwise identifier overlap before and after normalization."""
    from .analytics import build_matrix, load_source_sets, write_report

    sets = load_source_sets(sets_dir)
    pre = build_matrix(sets)
    index = _load_normalizer(compendia, gene_protein, drug_chemical, None) if compendia else None
    post = build_matrix(sets, index, conflate_gene_protein=conflate, conflate_drug_chemical=drug_chemical_conflate) if index else pre
    report = write_report(pre, post, out, figures)
    click.echo(
        f"{report['pre_connections']} -> {report['post_connections']} connections "
        f"({len(report['new_connections'])} new) -> {out}"
    )


@cli.command("desk-build")
@click.option("--out", required=True, type=click.Path())
def desk_build_cmd(out):
    """Build the bundled desk corpus (compendia, synonyms, conflations, graph inputs)."""
    from .desk import build_desk

    b = build_desk(out)
    click.echo(f"desk corpus -> {b.root}")


# options that take a file list; "--compendia a b c" becomes repeated flags
MULTI_VALUE = {"--mappings", "--labels", "--enrich", "--compendia", "--gene-protein", "--drug-chemical", "--synonyms", "--curie"}


def expand_multi(argv: list[str]) -> list[str]:
    """Let a file-list option take several values after one flag, as shells expand globs.

    No command takes positional arguments, so a bare token after such an
    option's value is another value for it.
    """
    out: list[str] = []
    current = None
    pending = False
    for tok in argv:
        if tok.startswith("-"):
            current = tok if tok in MULTI_VALUE else None
            pending = current is not None
            out.append(tok)
        elif current is not None and not pending:
            out += [current, tok]
        else:
            pending = False
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = expand_multi(list(sys.argv[1:] if argv is None else argv))
    try:
        cli.main(args=argv, prog_name="kgnorm", standalone_mode=False)
    except click.exceptions.Abort:
        return 130
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except (KgnormError, KeyError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
