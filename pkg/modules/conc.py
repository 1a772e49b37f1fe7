import report_generator
from lattice import con_lattice
from modules import EXIT_CLEAN
from semilattice import is_boolean
from workspace import conc_to_json, load_workspace


def app(args) -> int:
    ws = load_workspace(args.workspace)
    L = ws.get("lattices", args.lattice)
    C = con_lattice(L, args.max_size)
    payload = {
        "lattice": args.lattice,
        "lattice_size": L.size,
        "conc_size": C.size,
        "boolean": is_boolean(C),
        "conc": conc_to_json(C),
    }
    print(report_generator.render(payload, fmt=args.format))
    return EXIT_CLEAN
