"""Client-side recipe encryption.

Blob layout (format ``WRCP1``)::

    magic "WRCP1" (5) | salt (16) | nonce (12) | AES-256-GCM ciphertext + tag

The key is derived from the passphrase and the blob's salt with scrypt; the
magic bytes are authenticated as associated data. Any change to these
parameters requires a new magic.
"""

import os

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from ..core.exceptions import RecipeAuthError, RecipeFormatError
from ..models import EncryptedRecipe, Recipe
from .recipe import deserialize_recipe, serialize_recipe

KEY_LEN = 32
SCRYPT_N = 2**15
SCRYPT_R = 8
SCRYPT_P = 1


def derive_key(passphrase: str, salt: bytes) -> bytes:
    """Derive a 256-bit key from a passphrase with scrypt.

    Args:
        passphrase: User passphrase.
        salt: Per-blob random salt.

    Returns:
        32-byte key.
    """
    kdf = Scrypt(salt=salt, length=KEY_LEN, n=SCRYPT_N, r=SCRYPT_R, p=SCRYPT_P)
    return kdf.derive(passphrase.encode("utf-8"))


def encrypt_recipe(recipe: Recipe, passphrase: str) -> EncryptedRecipe:
    """Encrypt a recipe with a fresh salt and nonce.

    Args:
        recipe: Recipe to seal.
        passphrase: Non-empty passphrase.

    Returns:
        EncryptedRecipe; two calls never produce the same blob.

    Raises:
        ValueError: Empty passphrase.
    """
    if not passphrase:
        raise ValueError("passphrase must not be empty")
    salt = os.urandom(EncryptedRecipe.SALT_LEN)
    nonce = os.urandom(EncryptedRecipe.NONCE_LEN)
    key = derive_key(passphrase, salt)
    plaintext = serialize_recipe(recipe).encode("utf-8")
    ciphertext = AESGCM(key).encrypt(nonce, plaintext, EncryptedRecipe.MAGIC)
    return EncryptedRecipe(salt=salt, nonce=nonce, ciphertext_and_tag=ciphertext)


def decrypt_recipe(blob: bytes | EncryptedRecipe, passphrase: str) -> Recipe:
    """Authenticate and decrypt a recipe blob.

    Args:
        blob: Blob bytes or a parsed EncryptedRecipe.
        passphrase: Passphrase used at encryption.

    Returns:
        The recipe.

    Raises:
        RecipeFormatError: Truncated blob or unknown magic.
        RecipeAuthError: Wrong passphrase or tampered blob.
        ValueError: Empty passphrase.
    """
    if not passphrase:
        raise ValueError("passphrase must not be empty")
    encrypted = blob if isinstance(blob, EncryptedRecipe) else EncryptedRecipe.from_bytes(blob)
    key = derive_key(passphrase, encrypted.salt)
    try:
        plaintext = AESGCM(key).decrypt(
            encrypted.nonce, encrypted.ciphertext_and_tag, encrypted.magic
        )
    except InvalidTag:
        raise RecipeAuthError("wrong passphrase or tampered recipe") from None
    try:
        return deserialize_recipe(plaintext.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise RecipeFormatError("recipe payload is not UTF-8") from e
