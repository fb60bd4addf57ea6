"""
Servicio de checkpoints
Contenedor binario versionado y con checksum para el estado completo de un
agente (parámetros, optimizadores, generadores aleatorios, memorias) más el
estado del arnés necesario para reanudar un entrenamiento.

Formato (little-endian):
    MAGIC (8 bytes) | versión u32 | longitud de cabecera u64 | cabecera JSON |
    arrays (orden de la cabecera, row-major) | sha256 de todo lo anterior (32 bytes)
"""

import hashlib
import json
import logging
import os
from pathlib import Path
import struct
from typing import Optional

import numpy as np

from models.agent_models import AGENT_CONFIGS, AgentKind
from services.agents import create_agent
from utils.errors import CheckpointError, CheckpointIntegrityError, CheckpointVersionError

logger = logging.getLogger(__name__)

MAGIC = b"V2XHOCK\x00"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sIQ")
_DIGEST_SIZE = 32

# =============================================================================
# CONTENEDOR
# =============================================================================

def encode_checkpoint(meta: dict, arrays: dict[str, np.ndarray]) -> bytes:
    """
    Serializa metadatos JSON y arrays con nombre en bytes deterministas.
    
    Los arrays se ordenan por nombre y se guardan como little-endian en orden C,
    de modo que guardar → cargar → guardar produce los mismos bytes.
    """
    entries = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        array = np.asarray(arrays[name])
        dtype = array.dtype if array.dtype.byteorder == "|" else array.dtype.newbyteorder("<")
        data = np.ascontiguousarray(array, dtype=dtype).tobytes(order="C")
        entries.append({
            "name": name,
            "dtype": dtype.str,
            "shape": list(array.shape),
            "offset": offset,
            "nbytes": len(data),
        })
        blobs.append(data)
        offset += len(data)
    header = json.dumps(
        {"meta": meta, "arrays": entries, "payload_bytes": offset},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)) + header + b"".join(blobs)
    return body + hashlib.sha256(body).digest()


def decode_checkpoint(raw: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    """
    Valida y decodifica un contenedor.
    
    Raises:
        CheckpointIntegrityError: Archivo truncado, cabecera ilegible o checksum inválido
        CheckpointVersionError: Versión de formato distinta de FORMAT_VERSION
    """
    if len(raw) < _PREFIX.size + _DIGEST_SIZE:
        raise CheckpointIntegrityError(f"Checkpoint truncado ({len(raw)} bytes)")
    magic, version, header_len = _PREFIX.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CheckpointIntegrityError("Cabecera mágica inválida: no es un checkpoint")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"Versión de checkpoint {version} incompatible (se esperaba {FORMAT_VERSION})")

    body, digest = raw[:-_DIGEST_SIZE], raw[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointIntegrityError("Checksum sha256 inválido: archivo corrupto o truncado")

    header_end = _PREFIX.size + header_len
    if header_end > len(body):
        raise CheckpointIntegrityError("Cabecera más larga que el archivo")
    try:
        header = json.loads(body[_PREFIX.size:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointIntegrityError(f"Cabecera ilegible: {e}") from e
    payload = body[header_end:]
    if len(payload) != header["payload_bytes"]:
        raise CheckpointIntegrityError(
            f"Longitud de datos {len(payload)} distinta de la declarada {header['payload_bytes']}"
        )

    arrays = {}
    for entry in header["arrays"]:
        chunk = payload[entry["offset"]:entry["offset"] + entry["nbytes"]]
        arrays[entry["name"]] = np.frombuffer(chunk, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"]).copy()
    return header["meta"], arrays


def save_checkpoint(meta: dict, arrays: dict[str, np.ndarray], path: str | Path) -> Path:
    """Escribe el contenedor de forma atómica (archivo temporal + rename)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = encode_checkpoint(meta, arrays)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(raw)
    os.replace(tmp, path)
    logger.info(f"💾 Checkpoint guardado: {path} ({len(raw)} bytes)")
    return path


def load_checkpoint(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """
    Lee y valida un checkpoint.
    
    Raises:
        CheckpointError: Archivo inexistente
        CheckpointIntegrityError / CheckpointVersionError: Ver decode_checkpoint
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint no encontrado: {path}")
    return decode_checkpoint(path.read_bytes())

# =============================================================================
# AGENTES
# =============================================================================

def save_agent(agent, path: str | Path, harness: Optional[dict] = None) -> Path:
    """Guarda el estado del agente y, opcionalmente, el estado del arnés"""
    meta, arrays = agent.state()
    return save_checkpoint({"agent": meta, "harness": harness or {}}, arrays, path)


def load_agent(path: str | Path):
    """
    Reconstruye un agente desde su checkpoint.
    
    Returns:
        tuple: (agente restaurado, estado del arnés)
    """
    meta, arrays = load_checkpoint(path)
    agent_meta = meta["agent"]
    kind = AgentKind(agent_meta["kind"])
    config = AGENT_CONFIGS[kind].model_validate(agent_meta["config"])
    agent = create_agent(kind, config, agent_meta["seed"])
    agent.load_state(agent_meta, arrays)
    return agent, meta.get("harness", {})
