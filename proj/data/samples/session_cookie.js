const crypto = require("crypto");

const KEY = Buffer.from(process.env.COOKIE_KEY, "hex");

function sealCookie(profile) {
  const cipher = crypto.createCipheriv("aes-128-ecb", KEY, null);
  const body = `email=${profile.email}&uid=${profile.uid}&role=${profile.role}`;
  return Buffer.concat([cipher.update(body, "utf8"), cipher.final()]).toString("base64");
}

function openCookie(token) {
  const decipher = crypto.createDecipheriv("aes-128-ecb", KEY, null);
  const text = Buffer.concat([decipher.update(Buffer.from(token, "base64")), decipher.final()]);
  return Object.fromEntries(new URLSearchParams(text.toString("utf8")));
}

module.exports = { sealCookie, openCookie };
