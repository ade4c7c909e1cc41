// Dashboard bootstrap: a small three-tab SPA plus the consent prompt route
// (#request=<id>). Talks only to the documented HTTP endpoints.

import { AuthClient, DataClient } from "../api.js";
import {
  buildConsentPrompt,
  ConsentError,
  decideConsent,
  externalGrantRows,
  renderDatasetView as viewDataset,
  revokeGrant,
} from "./viewmodel.js";
import {
  renderConsentPrompt,
  renderDatasetView,
  renderError,
  renderGrants,
} from "./render.js";

interface DashboardConfig {
  issuer: string;
  dataUrl: string;
  username: string;
  password: string;
}

function readConfig(): DashboardConfig {
  const params = new URLSearchParams(window.location.search);
  return {
    issuer: params.get("issuer") ?? "http://127.0.0.1:7700",
    dataUrl: params.get("data") ?? "http://127.0.0.1:7710",
    username: params.get("user") ?? "demo-user",
    password: params.get("password") ?? "demo-pass",
  };
}

async function main(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const config = readConfig();
  const auth = new AuthClient(config.issuer);
  const data = new DataClient(config.dataUrl);
  const session = await auth.openSession(config.username, config.password);

  const requestId = new URLSearchParams(window.location.hash.slice(1)).get("request");
  if (requestId) {
    try {
      const prompt = await buildConsentPrompt(auth, data, session, requestId);
      root.innerHTML = renderConsentPrompt(prompt);
      document.getElementById("consent-approve")?.addEventListener("click", async () => {
        const decisions: Record<string, boolean> = {};
        root
          .querySelectorAll<HTMLInputElement>("input.scope-approve")
          .forEach((box) => (decisions[box.value] = box.checked));
        const redirect = await decideConsent(auth, session, prompt, decisions);
        window.location.href = redirect;
      });
      document.getElementById("consent-deny")?.addEventListener("click", async () => {
        const redirect = await decideConsent(auth, session, prompt, {});
        window.location.href = redirect;
      });
    } catch (error) {
      if (error instanceof ConsentError) {
        root.innerHTML = renderError(error.message, error.retryable);
      } else {
        throw error;
      }
    }
    return;
  }

  const refresh = async () => {
    const hash = window.location.hash.slice(1) || "categories";
    if (hash === "grants") {
      const grants = externalGrantRows(await auth.listGrants(session));
      root.innerHTML = renderGrants(grants);
      root.querySelectorAll<HTMLButtonElement>("button.revoke").forEach((button) =>
        button.addEventListener("click", async () => {
          await revokeGrant(auth, session, button.value);
          await refresh();
        }),
      );
      return;
    }
    const tier = Number(new URLSearchParams(window.location.search).get("tier") ?? "1");
    const threshold = Number(
      new URLSearchParams(window.location.search).get("threshold") ?? "0.9",
    );
    const variant =
      new URLSearchParams(window.location.search).get("variant") === "long" ? "long" : "short";
    const view = await viewDataset(auth, data, session, {
      tab: hash as "categories" | "keywords" | "history",
      categoriesTier: (tier >= 1 && tier <= 3 ? tier : 1) as 1 | 2 | 3,
      keywordsThreshold: threshold,
      historyVariant: variant,
    });
    root.innerHTML = renderDatasetView(view);
  };
  window.addEventListener("hashchange", () => void refresh());
  await refresh();
}

void main();
