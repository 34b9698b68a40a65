from cuboidpack.io.schemas import (
    Instance,
    descriptor_from_dict,
    dump_instance,
    dump_packing,
    dump_report,
    instance_from_dict,
    instance_to_dict,
    jsonable,
    load_descriptor,
    load_instance,
    load_packing,
    packing_from_dict,
    packing_to_dict,
    read_json,
    write_json,
)

__all__ = [
    "Instance",
    "descriptor_from_dict",
    "dump_instance",
    "dump_packing",
    "dump_report",
    "instance_from_dict",
    "instance_to_dict",
    "jsonable",
    "load_descriptor",
    "load_instance",
    "load_packing",
    "packing_from_dict",
    "packing_to_dict",
    "read_json",
    "write_json",
]
