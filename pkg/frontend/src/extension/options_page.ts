// Options page controller: loads and saves recorder settings.

import { parseBlocklist, serializeBlocklist, settingsFromStorage } from "./options.js";

interface StorageArea {
  get(defaults: Record<string, unknown>): Promise<Record<string, unknown>>;
  set(values: Record<string, unknown>): Promise<void>;
}

declare const chrome: { storage: { sync: StorageArea } } | undefined;

function field(id: string): HTMLInputElement | HTMLTextAreaElement {
  const element = document.getElementById(id);
  if (!element) {
    throw new Error(`missing element #${id}`);
  }
  return element as HTMLInputElement | HTMLTextAreaElement;
}

export async function loadForm(storage: StorageArea): Promise<void> {
  const settings = settingsFromStorage(
    await storage.get({ ingestUrl: "", recorderSecret: "", userId: "", blocklist: [] }),
  );
  field("ingestUrl").value = settings.ingestUrl;
  field("recorderSecret").value = settings.recorderSecret;
  field("userId").value = settings.userId;
  field("blocklist").value = serializeBlocklist(settings.blocklist);
}

export async function saveForm(storage: StorageArea): Promise<void> {
  await storage.set({
    ingestUrl: field("ingestUrl").value.trim(),
    recorderSecret: field("recorderSecret").value.trim(),
    userId: field("userId").value.trim(),
    blocklist: parseBlocklist(field("blocklist").value),
  });
  const status = document.getElementById("status");
  if (status) {
    status.textContent = "Saved.";
  }
}

if (typeof chrome !== "undefined" && chrome) {
  const storage = chrome.storage.sync;
  void loadForm(storage);
  document.getElementById("save")?.addEventListener("click", () => void saveForm(storage));
}
