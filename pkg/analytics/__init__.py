"""Análisis de errores del solver acoplado.

Normas discretas de error frente a soluciones analíticas y órdenes de
convergencia entre refinamientos sucesivos.
"""
