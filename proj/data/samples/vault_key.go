package vault

import (
	"crypto/rand"
	"crypto/sha256"

	"golang.org/x/crypto/pbkdf2"
)

const (
	saltSize   = 16
	iterations = 1000
	keySize    = 32
)

// DeriveVaultKey turns a user password into the key that encrypts the vault.
func DeriveVaultKey(password string) (key, salt []byte, err error) {
	salt = make([]byte, saltSize)
	if _, err = rand.Read(salt); err != nil {
		return nil, nil, err
	}
	key = pbkdf2.Key([]byte(password), salt, iterations, keySize, sha256.New)
	return key, salt, nil
}
