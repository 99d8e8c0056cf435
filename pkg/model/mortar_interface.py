"""
model/mortar_interface.py - Espacio mortero Λ_h y matrices de acoplamiento en Γ.

El mortero vive en su propia partición de cada segmento: P0 (un DOF por
intervalo) o P1 (continuo dentro del segmento, discontinuo entre segmentos).
Las integrales traza x mortero se calculan sobre la partición fusionada de
las tres particiones con Gauss de 2 puntos por subintervalo, exacta para los
integrandos de grado <= 1 que aparecen aquí.

Convención de signos: los valores de traza están en la orientación global
de los DOFs (+x / +y); B_Gamma_S y B_Gamma_D incluyen el signo n·g de cada
lado, de modo que la continuidad débil se lee
    B_Gamma_S t_S + B_Gamma_D t_D = 0.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from geometry.interface import DEDUP_RTOL, InterfaceSegmentation
from solver.linear_algebra import TripletBuilder
from utils.errors import MortarError
from utils.quadrature import interval_rule

logger = logging.getLogger(__name__)

SOLVABILITY_THRESHOLD = float(os.getenv("MORTAR_SOLVABILITY_TOL", "1e-10"))


@dataclass(frozen=True, eq=False)
class MortarSpace:
    segmentation: InterfaceSegmentation
    degree: int
    offsets: np.ndarray

    @classmethod
    def build(cls, segmentation: InterfaceSegmentation, degree: Optional[int] = None) -> "MortarSpace":
        degree = segmentation.mortar_spec.degree if degree is None else degree
        if degree not in (0, 1):
            raise MortarError(f"grado de mortero no soportado: {degree}")
        counts = [seg.mortar_partition.size - 1 + degree for seg in segmentation.segments]
        offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        return cls(segmentation, degree, offsets)

    @property
    def n_dofs(self) -> int:
        return int(self.offsets[-1])

    def basis(self, k: int, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Funciones de base no nulas en los puntos s del segmento k.

        Returns:
            (índices de DOF, valores), ambos de forma (len(s), 1 + degree)
        """
        partition = self.segmentation.segments[k].mortar_partition
        s = np.asarray(s, dtype=float)
        element = np.clip(np.searchsorted(partition, s, side="right") - 1, 0, partition.size - 2)
        if self.degree == 0:
            return (self.offsets[k] + element)[:, None], np.ones((s.size, 1))
        a, b = partition[element], partition[element + 1]
        lam = (s - a) / (b - a)
        dofs = self.offsets[k] + np.column_stack([element, element + 1])
        return dofs, np.column_stack([1.0 - lam, lam])

    def evaluate(self, coeffs: np.ndarray, k: int, s: np.ndarray) -> np.ndarray:
        dofs, vals = self.basis(k, s)
        return np.sum(np.asarray(coeffs)[dofs] * vals, axis=1)

    def mass_matrix(self) -> sp.csr_matrix:
        builder = TripletBuilder((self.n_dofs, self.n_dofs))
        for k, seg in enumerate(self.segmentation.segments):
            h = np.diff(seg.mortar_partition)
            first = self.offsets[k] + np.arange(h.size)
            if self.degree == 0:
                builder.extend(first, first, h)
            else:
                builder.extend(first, first, h / 3.0)
                builder.extend(first + 1, first + 1, h / 3.0)
                builder.extend(first, first + 1, h / 6.0)
                builder.extend(first + 1, first, h / 6.0)
        return builder.tocsr()

    def element_midpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """(segmento, s) del punto medio de cada elemento de mortero."""
        seg_ids, mids = [], []
        for k, seg in enumerate(self.segmentation.segments):
            p = seg.mortar_partition
            seg_ids.append(np.full(p.size - 1, k))
            mids.append(0.5 * (p[:-1] + p[1:]))
        return np.concatenate(seg_ids), np.concatenate(mids)


@dataclass(eq=False)
class MortarCoupling:
    """
    Matrices de acoplamiento (mortero x traza) y proyecciones L².

    M_LS, M_LD son las masas mixtas sin signo; B_Gamma_* llevan el signo n·g.
    P_Sh, P_Dh: mortero -> traza; P_Lambda: traza de Darcy -> mortero;
    P_Lambda_S: traza de Stokes -> mortero.
    """

    mortar: MortarSpace
    M_LS: sp.csr_matrix
    M_LD: sp.csr_matrix
    B_Gamma_S: sp.csr_matrix
    B_Gamma_D: sp.csr_matrix
    mass_Lambda: sp.csr_matrix
    stokes_lengths: np.ndarray
    darcy_lengths: np.ndarray
    P_Sh: Optional[np.ndarray] = None
    P_Dh: Optional[np.ndarray] = None
    P_Lambda: Optional[np.ndarray] = None
    P_Lambda_S: Optional[np.ndarray] = None

    @property
    def n_mortar(self) -> int:
        return self.mortar.n_dofs


def assemble_coupling(segmentation: InterfaceSegmentation, mortar: Optional[MortarSpace] = None,
                      rtol: float = DEDUP_RTOL) -> MortarCoupling:
    """
    Integra ∫ χ_traza ξ_mortero sobre la partición fusionada de cada segmento.

    Raises:
        MortarError: si la fusión deja subintervalos de longitud nula
    """
    mortar = mortar or MortarSpace.build(segmentation)
    s_off = segmentation.stokes_offsets()
    d_off = segmentation.darcy_offsets()
    n_s, n_d = int(s_off[-1]), int(d_off[-1])
    ms = TripletBuilder((mortar.n_dofs, n_s))
    md = TripletBuilder((mortar.n_dofs, n_d))

    for k, seg in enumerate(segmentation.segments):
        merged = seg.merged_breakpoints(rtol)
        pts, wts = interval_rule(merged[:-1], merged[1:], order=2)
        pts, wts = pts.ravel(), wts.ravel()
        s_idx = np.clip(np.searchsorted(seg.stokes_trace, pts, side="right") - 1,
                        0, seg.stokes_trace.size - 2) + s_off[k]
        d_idx = np.clip(np.searchsorted(seg.darcy_trace, pts, side="right") - 1,
                        0, seg.darcy_trace.size - 2) + d_off[k]
        dofs, vals = mortar.basis(k, pts)
        for col in range(dofs.shape[1]):
            ms.extend(dofs[:, col], s_idx, wts * vals[:, col])
            md.extend(dofs[:, col], d_idx, wts * vals[:, col])

    M_LS, M_LD = ms.tocsr(), md.tocsr()
    sign_s = segmentation.trace_signs("stokes")
    sign_d = segmentation.trace_signs("darcy")
    coupling = MortarCoupling(
        mortar=mortar,
        M_LS=M_LS,
        M_LD=M_LD,
        B_Gamma_S=(M_LS @ sp.diags(sign_s)).tocsr(),
        B_Gamma_D=(M_LD @ sp.diags(sign_d)).tocsr(),
        mass_Lambda=mortar.mass_matrix(),
        stokes_lengths=segmentation.trace_lengths("stokes"),
        darcy_lengths=segmentation.trace_lengths("darcy"),
    )
    projection_matrices(coupling)
    logger.debug(f"Mortero P{mortar.degree}: {mortar.n_dofs} DOFs, traza S {n_s}, traza D {n_d}")
    return coupling


def projection_matrices(coupling: MortarCoupling) -> MortarCoupling:
    """
    Proyecciones L²(Γ) como (masa destino)⁻¹ x masa mixta. Las trazas son P0,
    así que su masa es diagonal; la del mortero se factoriza una vez.
    """
    coupling.P_Sh = (coupling.M_LS.T.toarray()) / coupling.stokes_lengths[:, None]
    coupling.P_Dh = (coupling.M_LD.T.toarray()) / coupling.darcy_lengths[:, None]
    lu = splu(coupling.mass_Lambda.tocsc())
    coupling.P_Lambda = lu.solve(coupling.M_LD.toarray())
    coupling.P_Lambda_S = lu.solve(coupling.M_LS.toarray())
    return coupling


def mortar_solvability(coupling: MortarCoupling) -> float:
    """
    Menor valor singular de P_Dh restringido a Λ_h en normas L²:
    min ||P_Dh ξ|| / ||ξ||, como menor valor singular de M_DD^{-1/2} M_DL L⁻ᵀ
    con M_Λ = L Lᵀ. Un núcleo exacto da σ del orden del redondeo.
    """
    M_LD = coupling.M_LD.toarray()
    if M_LD.shape[0] > M_LD.shape[1]:
        return 0.0
    L = scipy.linalg.cholesky(coupling.mass_Lambda.toarray(), lower=True)
    scaled = scipy.linalg.solve_triangular(L, M_LD, lower=True).T / np.sqrt(coupling.darcy_lengths)[:, None]
    return float(scipy.linalg.svdvals(scaled).min())


def check_mortar_solvability(coupling: MortarCoupling,
                             threshold: float = SOLVABILITY_THRESHOLD) -> float:
    """
    Raises:
        MortarError: si el mortero es demasiado rico frente a la traza de Darcy
    """
    sigma = mortar_solvability(coupling)
    if sigma <= threshold:
        raise MortarError(
            f"el mortero no es controlado por la traza de Darcy: σ_min = {sigma:.3e} "
            f"(reduzca los elementos de mortero o refine la malla de Darcy)")
    logger.debug(f"Condición de solubilidad del mortero: σ_min = {sigma:.3e}")
    return sigma


def check_infsup(coupling: MortarCoupling, stokes, darcy) -> float:
    """
    Constante inf-sup discreta de b_Γ sobre V_h (diagnóstico):
    β² = min λ de (C X⁻¹ Cᵀ) ξ = λ M_Λ ξ, con X la norma de V por subdominio.

    X_S = A_S + masa concentrada; X_D = A_D + B_Dᵀ diag(1/|E|) B_D.
    """
    dofs = stokes.dofs
    geom = dofs.geometry
    lumped = np.zeros(dofs.n_velocity)
    free1 = dofs.u1_unknown >= 0
    free2 = dofs.u2_unknown >= 0
    lumped[dofs.u1_unknown[free1]] = geom.volume_areas(1)[free1]
    lumped[dofs.u2_unknown[free2]] = geom.volume_areas(2)[free2]
    if dofs.n_tangential:
        weights = geom.vertex_weights
        for comp in (1, 2):
            idx = dofs.tangential_index[comp]
            mask = idx >= 0
            lumped[idx[mask]] = 0.25 * weights[mask]
    X_S = (stokes.A + sp.diags(lumped)).tocsc()

    areas = darcy.space.grid.cell_areas[darcy.space.grid.active]
    X_D = (darcy.A + darcy.B.T @ sp.diags(1.0 / areas) @ darcy.B).tocsc()

    C_S = (coupling.B_Gamma_S @ stokes.trace_map).toarray()
    C_D = (coupling.B_Gamma_D @ darcy.trace_map).toarray()
    S = C_S @ splu(X_S).solve(C_S.T) + C_D @ splu(X_D).solve(C_D.T)
    S = 0.5 * (S + S.T)
    eigenvalues = scipy.linalg.eigh(S, coupling.mass_Lambda.toarray(), eigvals_only=True)
    beta = float(np.sqrt(max(eigenvalues[0], 0.0)))
    logger.info(f"Constante inf-sup del mortero: β = {beta:.4f}")
    return beta
